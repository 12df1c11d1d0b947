#pragma once

// Level-q Bernoulli measures on finite truncations: entropies, certified
// Lyapunov brackets, potential integrals and the dimension functional.

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "incdim/ifs.hpp"

namespace incdim {

/// Cylinder enumeration budget shared by brackets and the optimizer.
inline constexpr std::size_t kDefaultCylinderBudget = std::size_t{1} << 20;
inline constexpr std::size_t kDefaultBlockBudget = std::size_t{1} << 24;

/// Block indexing for words of length q over an alphabet of size K:
/// index = sum_k d_k K^{q-1-k}.
struct BlockLayout {
  std::size_t alphabet = 0;
  int level = 1;
  std::size_t count = 0;

  BlockLayout() = default;
  BlockLayout(std::size_t alphabet_size, int q, std::size_t budget = kDefaultBlockBudget);
  void decode(std::size_t index, std::span<std::size_t> out) const;
};

/// The level-q Bernoulli measure with weights p on the blocks F^q.
class BernoulliMeasure {
 public:
  BernoulliMeasure(std::vector<Digit> support, int level, std::vector<double> weights);

  static BernoulliMeasure uniform(std::vector<Digit> support, int level = 1);
  static BernoulliMeasure point_mass(Digit d);

  int level() const noexcept { return layout_.level; }
  std::span<const Digit> support() const noexcept { return support_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const BlockLayout& layout() const noexcept { return layout_; }
  std::size_t block_count() const noexcept { return weights_.size(); }

  std::vector<Digit> block(std::size_t index) const;
  /// Rows present in the support (the vertical alphabet of the measure).
  std::vector<int> vertical_alphabet() const;
  /// Vertical q-block marginals, indexed over vertical_alphabet()^q.
  std::vector<double> vertical_marginal() const;
  /// Block index -> vertical block index.
  std::vector<std::size_t> vertical_unit_of_block() const;

 private:
  std::vector<Digit> support_;
  BlockLayout layout_;
  std::vector<double> weights_;
};

/// Entropies in nats per symbol.
struct EntropyStats {
  double total = 0.0;
  double vertical = 0.0;
  double conditional = 0.0;
};

EntropyStats entropy_stats(const BernoulliMeasure& mu);

/// Certified enclosure [lower, upper] together with the cylinder depth
/// that produced it.
struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  int depth = 1;

  double midpoint() const noexcept { return 0.5 * (lower + upper); }
  double width() const noexcept { return upper - lower; }
  bool contains(double x, double slack = 0.0) const noexcept {
    return x >= lower - slack && x <= upper + slack;
  }
};
using LyapunovBracket = Bracket;

enum class Axis { horizontal, vertical };

/// Per-cylinder Lyapunov sums for one axis, tabulated once and evaluated
/// as a polynomial in the unit (block or vertical block) weights.
///
/// For depth n = k q the lower bound is
///   (1/n) sum over k-tuples of units of prod w * (-log sup |f'_cyl|)
/// and the upper bound uses inf. Axes whose branches are all affine are
/// stored as one additive constant per unit.
class CylinderModel {
 public:
  CylinderModel(const INCSystem& system, std::span<const Digit> support, int level, Axis axis,
                int depth, std::size_t budget = kDefaultCylinderBudget);

  Axis axis() const noexcept { return axis_; }
  int depth() const noexcept { return depth_; }
  int level() const noexcept { return level_; }
  bool additive() const noexcept { return additive_; }
  std::size_t unit_count() const noexcept { return units_; }

  Bracket evaluate(std::span<const double> unit_weights) const;
  /// Gradients of the lower and upper bounds with respect to unit weights.
  Bracket evaluate(std::span<const double> unit_weights, std::span<double> grad_lower,
                   std::span<double> grad_upper) const;

  /// Number of cylinders a given depth would enumerate.
  static double cylinder_count(std::size_t units, int level, int depth);

 private:
  Axis axis_;
  int level_ = 1;
  int depth_ = 1;
  int arity_ = 1;
  std::size_t units_ = 0;
  bool additive_ = false;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Largest depth d <= wanted (d a multiple of the level) whose cylinder
/// table fits the budget; at least the level itself.
int affordable_depth(const INCSystem& system, std::span<const Digit> support, int level, int wanted,
                     std::size_t budget);

LyapunovBracket lyapunov(const INCSystem& system, const BernoulliMeasure& mu, Axis axis, int depth,
                         std::size_t budget = kDefaultCylinderBudget);

/// Bracket on D(mu) = h_cond / lambda_h + h_vert / lambda_v.
Bracket dimension(const INCSystem& system, const BernoulliMeasure& mu, int depth,
                  std::size_t budget = kDefaultCylinderBudget);

/// Combines entropies and Lyapunov brackets into a bracket on D; throws
/// Error when an entropy term is positive over a nonpositive exponent.
Bracket dimension_bracket(const EntropyStats& h, const Bracket& lambda_h, const Bracket& lambda_v);

enum class BoundSide { none, below, above };

/// A locally constant potential: `value` returns the Birkhoff sum over an
/// aligned block of `level` digits.
struct Potential {
  std::string name;
  int level = 1;
  std::function<double(std::span<const Digit>)> value;
  BoundSide side = BoundSide::none;
  double bound = 0.0;
};

class PotentialTable {
 public:
  PotentialTable(int level, std::vector<Digit> support, std::vector<double> values,
                 BoundSide side = BoundSide::none, double bound = 0.0);

  static PotentialTable tabulate(const Potential& phi, std::span<const Digit> support);

  int level() const noexcept { return layout_.level; }
  std::span<const Digit> support() const noexcept { return support_; }
  std::span<const double> values() const noexcept { return values_; }
  BoundSide side() const noexcept { return side_; }

  bool covers(Digit d) const { return index_.count(d) != 0; }
  /// Value on one block of exactly level() digits.
  double block_value(std::span<const Digit> block) const;
  /// Sum over the aligned level()-blocks of a word whose length is a
  /// multiple of level().
  double aligned_sum(std::span<const Digit> word) const;
  double min_value() const;
  double max_value() const;

 private:
  std::vector<Digit> support_;
  BlockLayout layout_;
  std::vector<double> values_;
  std::map<Digit, std::size_t> index_;
  BoundSide side_ = BoundSide::none;
  double bound_ = 0.0;
};

/// Per-symbol integral sum_B p_B phi(B) / q.
double integrate(const BernoulliMeasure& mu, const PotentialTable& phi);

/// Independent product of the measure's blocks, re-expressed at level q.
BernoulliMeasure lift_to_level(const BernoulliMeasure& mu, int q,
                               std::size_t max_blocks = kDefaultBlockBudget);

/// d(p) = sum p_i log p_i / sum p_i log b_i.
double vertical_dim(std::span<const double> p, std::span<const double> b);

namespace potentials {

Potential row_indicator(int row);
/// phi(i, j) = j: the CF digit for Gauss-Renyi systems.
Potential digit_value();
Potential log_digit();
/// phi(i, j) = i: the binary digit for Gauss-Renyi systems.
Potential vertical_digit();
/// Indicator of horizontal label k (digit frequency of k).
Potential digit_indicator(long k);

}  // namespace potentials

}  // namespace incdim
