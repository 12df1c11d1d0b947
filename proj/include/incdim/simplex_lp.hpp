#pragma once

// Dense two-phase simplex, used only as a feasibility oracle for linear
// constraints over the probability simplex.

#include <vector>

namespace incdim {

struct LinearRows {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
};

struct FeasibilityResult {
  bool feasible = false;
  /// A feasible point when `feasible`; otherwise the phase-1 minimiser.
  std::vector<double> point;
  /// Minimal total violation sum |A x - b| reached by phase 1.
  double violation = 0.0;
  /// Phase-1 dual multipliers, equality rows first, then inequality rows.
  std::vector<double> multipliers;
};

/// Is there x >= 0 with sum x = 1, eq.a x = eq.b and le.a x <= le.b?
FeasibilityResult simplex_feasibility(const LinearRows& eq, const LinearRows& le,
                                      std::size_t dimension, double tolerance = 1e-9);

}  // namespace incdim
