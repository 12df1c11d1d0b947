#pragma once

// Approximate-square covers of finite attractors and box-counting slopes.

#include <cstdint>
#include <vector>

#include "incdim/symbolic.hpp"

namespace incdim {

struct CoverSet {
  std::vector<CoverRectangle> rectangles;
  /// Longest word used.
  int depth = 0;
  std::uint64_t fingerprint = 0;
  /// False when the rectangle cap stopped the expansion.
  bool complete = true;

  double max_width() const;
};

/// Expands words depth first until prod a_ij <= target, which bounds both
/// sides of every approximate square below the word; each stopped word is
/// covered by its squares over all vertical continuations.
CoverSet render_cover(const INCSystem& system, double target_width, std::size_t cap = 1u << 22);

/// Occupied half-open grid boxes [k eps, (k+1) eps)^2.
std::size_t count_boxes(const std::vector<CoverRectangle>& rects, double eps);

struct ScaleCount {
  double epsilon = 0.0;
  std::size_t count = 0;
  bool used = false;
};

struct BoxDimension {
  double slope = 0.0;
  double std_error = 0.0;
  std::vector<ScaleCount> counts;
};

/// eps = 2^-4 ... 2^-10.
std::vector<double> default_scales();

/// Least-squares slope of log N against log(1/eps). The two coarsest scales
/// are dropped and scales finer than twice the widest rectangle are unusable.
BoxDimension estimate_dimension(const CoverSet& cover, const std::vector<double>& scales = default_scales());

}  // namespace incdim
