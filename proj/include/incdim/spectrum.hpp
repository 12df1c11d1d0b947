#pragma once

// Level-set dimensions of Birkhoff averages through the m-sweep of window
// constraints, and equality-constrained spectrum curves.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "incdim/optimizer.hpp"

namespace incdim {

struct SpectrumRequest {
  INCSystem system;
  /// phi_1, phi_2, ...; stage m constrains phi_k for k <= m.
  std::vector<std::shared_ptr<const PotentialTable>> potentials;
  /// alpha_k, +-infinity allowed.
  std::vector<double> targets;
  std::vector<int> m_schedule;
  /// One truncation per stage, or a single one shared by every stage.
  std::vector<DigitTruncation> truncations;
  int level = 1;
  OptConfig cfg;
};

/// Constraints for stage m: windows B_m(alpha_k) for k <= m, with infinite
/// targets turned into one-sided bounds at m.
std::vector<ConstraintSpec> stage_constraints(const SpectrumRequest& req, int m);

struct LevelSetStage {
  int m = 0;
  std::size_t trunc_size = 0;
  bool feasible = false;
  std::optional<OptResult> result;
  std::string note;
};

struct LevelSetReport {
  std::vector<LevelSetStage> stages;
  /// Value of the last feasible stage (upper bracket).
  double limit = 0.0;
  /// Change of the upper bracket between the last two feasible stages.
  double trend = 0.0;
  /// Richardson-style estimate assuming an error proportional to 1/m.
  double richardson = 0.0;
  bool nonincreasing = true;
  /// No stage was feasible on its truncation.
  bool empty = false;
};

/// Diagonal schedule: stage s uses m_schedule[s] with truncations[s].
LevelSetReport level_set_dim(const SpectrumRequest& req);

/// Upper brackets over an m x truncation grid, filled so that every cell
/// can warm start from its finer-m and coarser-truncation neighbours.
struct LevelSetGrid {
  std::vector<int> m_values;
  std::vector<std::size_t> trunc_sizes;
  /// cells[i][j] for m_values[i] and truncation j.
  std::vector<std::vector<LevelSetStage>> cells;
};

LevelSetGrid level_set_grid(const SpectrumRequest& req);

struct SpectrumRow {
  double alpha = 0.0;
  bool feasible = false;
  /// alpha sits at the truncation's minimum or maximum of phi.
  bool endpoint = false;
  std::optional<OptResult> result;
};

/// One equality-constrained maximisation per grid point, warm started along
/// the grid.
std::vector<SpectrumRow> spectrum_curve(const INCSystem& system, std::shared_ptr<const PotentialTable> phi,
                                        const std::vector<double>& alphas, int level, const OptConfig& cfg);

}  // namespace incdim
