#pragma once

// Finite words, cylinder geometry, the fiber-matching index L_n and
// approximate squares.

#include <algorithm>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "incdim/ifs.hpp"

namespace incdim {

using Word = std::vector<Digit>;

/// Horizontal x vertical rectangle; `depth` is the word length n and
/// `fiber_depth` the vertical depth L used for the vertical side.
struct CoverRectangle {
  Interval h;
  Interval v;
  int depth = 0;
  int fiber_depth = 0;

  double diameter() const noexcept { return std::max(h.width(), v.width()); }
  bool contains(double x, double y, double slack = 0.0) const noexcept {
    return h.contains(x, slack) && v.contains(y, slack);
  }
};

/// Vertical projection (i_1, ..., i_n).
std::vector<int> project(std::span<const Digit> word);

/// Least l >= n with sum_{v<=l} log b_{i_v} <= sum_{v<=n} log a_{i_v j_v}.
///
/// The vertical sequence is the word's own projection followed by
/// `extension`. Throws Error when the extension runs out first.
int l_index(const INCSystem& system, std::span<const Digit> word, std::span<const int> extension);

/// Image of [0,1] under f_{w_1} o ... o f_{w_n}.
Interval horizontal_image(const INCSystem& system, std::span<const Digit> word);
/// Image of [0,1] under g_{i_1} o ... o g_{i_l}.
Interval vertical_image(const INCSystem& system, std::span<const int> vertical_word);

/// The n-th approximate square of the word continued by `extension`.
CoverRectangle approximate_square(const INCSystem& system, std::span<const Digit> word,
                                  std::span<const int> extension);

/// prod_{v<=n} a / prod_{v<=L} b, which lies in [1, 1/b_min) when L = l_index.
double ratio_check(const INCSystem& system, std::span<const Digit> word,
                   std::span<const int> extension, int L);

/// Approximation of the coding map Pi for a long word (image of the
/// square's centre under S_{w_1} o ... o S_{w_n}).
std::pair<double, double> coding_point(const INCSystem& system, std::span<const Digit> word);

/// One rectangle per line: "x0 x1 y0 y1" at 17 significant digits.
void write_rectangles(std::ostream& out, std::span<const CoverRectangle> rects);

}  // namespace incdim
