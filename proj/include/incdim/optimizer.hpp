#pragma once

// Maximisation of D over level-q Bernoulli measures on a finite truncation,
// with optional Birkhoff-average constraints.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "incdim/ifs.hpp"
#include "incdim/measures.hpp"

namespace incdim {

/// Integral equal to alpha.
struct Equality {
  double alpha = 0.0;
};
/// Integral in the open window (alpha - 1/m, alpha + 1/m).
struct Window {
  double alpha = 0.0;
  double m = 1.0;
};
/// Integral > m (target +infinity).
struct LowerBound {
  double m = 1.0;
};
/// Integral < -m (target -infinity).
struct UpperBound {
  double m = 1.0;
};
using ConstraintKind = std::variant<Equality, Window, LowerBound, UpperBound>;

struct ConstraintSpec {
  std::shared_ptr<const PotentialTable> potential;
  ConstraintKind kind;
};

std::string describe(const ConstraintKind& kind);

/// Phase-1 evidence that the linear constraints have no solution on the
/// simplex: the least total violation and the dual multipliers.
struct InfeasibilityCertificate {
  double violation = 0.0;
  std::vector<double> multipliers;
  std::string summary;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(InfeasibilityCertificate c)
      : Error("constraints infeasible on this truncation: " + c.summary), certificate_(std::move(c)) {}
  const InfeasibilityCertificate& certificate() const noexcept { return certificate_; }

 private:
  InfeasibilityCertificate certificate_;
};

struct OptConfig {
  int starts = 16;
  std::uint64_t seed = 0;
  /// Worker threads for the starts; 0 uses the hardware concurrency.
  int threads = 0;
  /// Cylinder depth of the Lyapunov midpoint inside the objective; lowered
  /// until the table fits `objective_budget`.
  int objective_depth = 2;
  std::size_t objective_budget = std::size_t{1} << 16;
  /// Budget for the final re-bracketing at twice the objective depth.
  std::size_t bracket_budget = kDefaultCylinderBudget;
  int max_inner_iterations = 3000;
  int max_outer_rounds = 8;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double equality_tolerance = 1e-8;
  double strict_slack = 1e-10;
  double gradient_tolerance = 1e-10;
  /// Coordinates below this weight are dropped for the face re-solve.
  double prune_threshold = 1e-7;
  /// Earlier optima, each tried as an extra start and as a candidate.
  std::vector<BernoulliMeasure> warm_starts;
};

struct OptResult {
  std::vector<Digit> support;
  int level = 1;
  std::vector<double> weights;
  /// Final bracket on D (re-bracketed at twice the objective depth when affordable).
  Bracket dimension;
  /// Objective value at the optimum (Lyapunov midpoints, objective depth).
  double objective = 0.0;
  int objective_depth = 1;
  /// Per constraint: signed violation, <= 0 when satisfied.
  std::vector<double> residuals;
  std::vector<double> integrals;
  double kkt_residual = 0.0;
  int starts_used = 0;
  int iterations = 0;
  bool converged = false;
  bool feasible = true;
  double seconds = 0.0;

  BernoulliMeasure measure() const { return BernoulliMeasure(support, level, weights); }
};

/// D over block weights p, with Lyapunov exponents replaced by their bracket
/// midpoints at a fixed cylinder depth. Defined on the positive orthant so
/// that finite differences can probe every coordinate.
class DimensionObjective {
 public:
  DimensionObjective(const INCSystem& system, std::vector<Digit> support, int level, int depth,
                     std::size_t budget = kDefaultCylinderBudget);

  std::size_t size() const noexcept { return block_count_; }
  int level() const noexcept { return level_; }
  int depth() const noexcept { return horizontal_.depth(); }
  std::span<const Digit> support() const noexcept { return support_; }

  double value(std::span<const double> p) const;
  double value_and_gradient(std::span<const double> p, std::span<double> grad) const;

 private:
  std::vector<Digit> support_;
  int level_;
  std::size_t block_count_;
  std::size_t vertical_count_;
  std::vector<std::size_t> vertical_of_block_;
  CylinderModel horizontal_;
  CylinderModel vertical_;
};

DimensionObjective make_objective(const INCSystem& system, int level, const OptConfig& cfg);

/// Maximises D over level-q Bernoulli measures on the digits of a finite
/// system. Throws InfeasibleError when the constraints have no solution.
OptResult maximize_dimension(const INCSystem& system, int level,
                             const std::vector<ConstraintSpec>& constraints, const OptConfig& cfg = {});

/// log(sum t_i^theta) / log m with theta = log m / log n.
double mcmullen_closed_form(int m, int n, std::span<const int> row_counts);

struct SweepResult {
  std::vector<std::size_t> sizes;
  std::vector<OptResult> stages;
  /// Values nondecreasing up to bracket width + 1e-9.
  bool nondecreasing = true;
};

/// Optimises along an increasing schedule of truncations, warm starting each
/// stage from the previous optimum.
SweepResult truncation_sweep(const INCSystem& system, const std::vector<DigitTruncation>& schedule,
                             int level, const std::vector<ConstraintSpec>& constraints,
                             const OptConfig& cfg = {});

}  // namespace incdim
