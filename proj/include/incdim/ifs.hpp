#pragma once

// Interval iterated function systems, INC systems and their validation.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace incdim {

/// Base class for recoverable library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an enumeration or memory budget would be exceeded.
class BudgetError : public Error {
 public:
  using Error::Error;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double x, double slack = 0.0) const noexcept {
    return x >= lo - slack && x <= hi + slack;
  }
  bool contains(const Interval& other, double slack = 0.0) const noexcept {
    return other.lo >= lo - slack && other.hi <= hi + slack;
  }
};

inline constexpr Interval kUnitInterval{0.0, 1.0};

/// x -> +-ratio * x + offset.
struct Affine {
  double ratio = 0.5;
  double offset = 0.0;
  bool reversed = false;
};

/// x -> 1 / (a + x), the inverse branches of the Gauss map.
struct GaussBranch {
  long a = 1;
};

/// y -> (y + b) / base.
struct BinaryBranch {
  int b = 0;
  int base = 2;
};

using Branch = std::variant<Affine, GaussBranch, BinaryBranch>;

double apply(const Branch& f, double x);
/// Signed derivative f'(x).
double derivative(const Branch& f, double x);
/// Sorted image of an interval (all branches are monotone).
Interval image(const Branch& f, Interval in);
/// True for branches with constant derivative.
bool is_affine(const Branch& f) noexcept;
std::string describe(const Branch& f);

struct DerivRange {
  double inf_abs = 0.0;
  double sup_abs = 0.0;
};

/// Exact range of |f'| over a closed subinterval of [0,1].
/// Throws std::invalid_argument for intervals leaving [0,1].
DerivRange deriv_range(const Branch& f, Interval in = kUnitInterval);

/// Range of log|(f_1 o ... o f_n)'| over [0,1], words applied right to left.
///
/// Every supported branch is a Moebius map, so the derivative of a
/// composition is monotone in absolute value and its extremes sit at the
/// endpoints. The chain rule is evaluated forward from x = 0 and x = 1.
struct LogDerivRange {
  double log_inf = 0.0;
  double log_sup = 0.0;
};
LogDerivRange composed_log_deriv_range(std::span<const Branch* const> word);

/// Image of [0,1] under f_1 o ... o f_n.
Interval composed_image(std::span<const Branch* const> word, Interval in = kUnitInterval);

/// n -> rho_n, the tempered distortion sequence of a branch family.
using DistortionSequence = std::function<double(int)>;

/// A finite or countable interval IFS. Countable families are an
/// index -> branch membership function plus an enumeration cap.
class IntervalIFS {
 public:
  using Member = std::function<std::optional<Branch>(long)>;

  static IntervalIFS finite(std::vector<long> labels, std::vector<Branch> branches,
                            double contraction_ratio, DistortionSequence rho = {});
  static IntervalIFS countable(Member member, long first_label, long enumeration_cap,
                               double contraction_ratio, DistortionSequence rho = {});

  bool is_finite() const noexcept { return finite_; }
  long enumeration_cap() const noexcept { return cap_; }
  double contraction_ratio() const noexcept { return xi_; }
  double distortion(int n) const { return rho_ ? rho_(n) : 0.0; }
  const DistortionSequence& distortion_sequence() const noexcept { return rho_; }

  /// Labels in increasing order; countable families stop at `cap`
  /// (or at the family's own enumeration cap when cap < 0).
  std::vector<long> labels(long cap = -1) const;
  bool contains(long label) const;
  Branch branch(long label) const;

 private:
  bool finite_ = true;
  std::map<long, Branch> table_;
  Member member_;
  long first_ = 1;
  long cap_ = 0;
  double xi_ = 0.5;
  DistortionSequence rho_;
};

/// A digit (i, j): vertical digit i, horizontal label j within row i.
struct Digit {
  int row = 0;
  long index = 0;
  auto operator<=>(const Digit&) const = default;
};

std::string to_string(Digit d);

enum class CheckStatus { pass, warn, fail };
std::string_view to_string(CheckStatus s);

struct Finding {
  std::string check;  // "UCC", "OIC", "TDP", "dominance"
  CheckStatus status = CheckStatus::pass;
  std::string witness;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> entries;
  std::optional<int> ucc_horizon;
  std::vector<Digit> dominance_violations;
  std::optional<std::pair<long, long>> oic_overlap;

  bool has(CheckStatus s) const;
  const Finding* find(std::string_view check) const;
  bool operator==(const ValidationReport&) const = default;
};

/// Planar system S_ij(x, y) = (f_ij(x), g_i(y)).
class INCSystem {
 public:
  INCSystem(std::string name, IntervalIFS vertical, std::map<int, IntervalIFS> rows);

  const std::string& name() const noexcept { return name_; }
  const IntervalIFS& vertical() const noexcept { return vertical_; }
  const IntervalIFS& row(int i) const;
  const std::map<int, IntervalIFS>& rows() const noexcept { return rows_; }

  /// Vertical alphabet A (the rows carrying at least one digit).
  std::vector<int> vertical_digits() const;
  /// Digit set, countable rows enumerated up to their caps; sorted.
  std::vector<Digit> digits() const;
  bool is_finite() const;
  bool contains(Digit d) const;

  Branch horizontal_branch(Digit d) const;
  Branch vertical_branch(int i) const;

  /// a_ij = sup |f_ij'|.
  double a(Digit d) const;
  /// b_i = sup |g_i'|.
  double b(int i) const;
  /// inf |g_i'|.
  double b_inf(int i) const;
  double b_min() const;

  const std::optional<ValidationReport>& validation() const noexcept { return validation_; }
  INCSystem with_validation(ValidationReport report) const;

  /// Stable hash of the enumerated digit set and branch parameters.
  std::uint64_t fingerprint() const;

 private:
  std::string name_;
  IntervalIFS vertical_;
  std::map<int, IntervalIFS> rows_;
  std::map<int, double> b_sup_;
  std::map<int, double> b_inf_;
  std::optional<ValidationReport> validation_;
};

/// Finite subset F of D as per-row label lists.
struct DigitTruncation {
  std::map<int, std::vector<long>> rows;

  static DigitTruncation from_digits(std::span<const Digit> digits);
  std::vector<Digit> digits() const;
  std::size_t size() const;
};

struct ValidationOptions {
  int depth_budget = 8;
  /// Words examined per depth; larger alphabets are sampled through their
  /// most expanding branches.
  std::size_t word_budget = 1u << 16;
};

ValidationReport validate(const INCSystem& system, const ValidationOptions& opts = {});

/// Restriction of a system to the digits of F.
INCSystem truncate(const INCSystem& system, const DigitTruncation& F);

/// Drops every digit listed in the report's dominance violations.
INCSystem exclude_violations(const INCSystem& system, const ValidationReport& report);

/// All digits with horizontal label <= max_index (rows without any are dropped).
DigitTruncation truncation_by_index(const INCSystem& system, long max_index);

// --- built-in systems -----------------------------------------------------

/// Grid cells (row, column) of an m x n Bedford-McMullen carpet.
INCSystem bedford_mcmullen(int m, int n, std::vector<std::pair<int, int>> cells);
/// Row i receives the first t_i columns.
INCSystem bedford_mcmullen_rows(int m, int n, std::span<const int> row_counts);

enum class GaussDigitRule {
  n_mod_2,  // D = {(n, n mod 2)}
  all,      // D = N x {0, 1}
};

/// Gauss-Renyi product: continued-fraction horizontal branches, binary
/// vertical branches; digits with CF label <= max_index are enumerated.
INCSystem gauss_renyi(GaussDigitRule rule, long max_index);
/// Explicit finite digit list of (CF digit n, binary digit b) pairs.
INCSystem gauss_renyi(std::span<const std::pair<long, int>> digits);

struct LGRow {
  double height = 0.5;
  std::vector<double> widths;
};
/// Lalley-Gatzouras carpet: rows stacked bottom to top, cells left to right.
INCSystem lalley_gatzouras(std::span<const LGRow> rows);

}  // namespace incdim
