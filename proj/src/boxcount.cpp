#include "incdim/boxcount.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "incdim/numeric.hpp"

namespace incdim {

double CoverSet::max_width() const {
  double w = 0.0;
  for (const CoverRectangle& r : rectangles) w = std::max(w, r.diameter());
  return w;
}

namespace {

struct Expander {
  const INCSystem& system;
  double log_target;
  std::size_t cap;
  std::vector<Digit> digits;
  std::vector<int> rows;
  CoverSet& out;

  bool full() const { return out.rectangles.size() >= cap; }

  void extend(const Word& word, const Interval& h, std::vector<int>& vertical, double log_b,
              double threshold) {
    if (full()) return;
    if (static_cast<int>(vertical.size()) >= static_cast<int>(word.size()) &&
        log_b <= threshold + kContainmentSlack * std::max(1.0, std::fabs(threshold))) {
      out.rectangles.push_back({h, vertical_image(system, vertical), static_cast<int>(word.size()),
                                static_cast<int>(vertical.size())});
      return;
    }
    for (int i : rows) {
      vertical.push_back(i);
      extend(word, h, vertical, log_b + std::log(system.b(i)), threshold);
      vertical.pop_back();
      if (full()) return;
    }
  }

  void expand(Word& word, double log_a) {
    if (full()) {
      out.complete = false;
      return;
    }
    if (!word.empty() && log_a <= log_target) {
      out.depth = std::max(out.depth, static_cast<int>(word.size()));
      const Interval h = horizontal_image(system, word);
      std::vector<int> vertical;
      double log_b = 0.0;
      for (Digit d : word) {
        vertical.push_back(d.row);
        log_b += std::log(system.b(d.row));
      }
      extend(word, h, vertical, log_b, log_a);
      if (full()) out.complete = false;
      return;
    }
    for (Digit d : digits) {
      word.push_back(d);
      expand(word, log_a + std::log(system.a(d)));
      word.pop_back();
      if (!out.complete) return;
    }
  }
};

}  // namespace

CoverSet render_cover(const INCSystem& system, double target_width, std::size_t cap) {
  if (!(target_width > 0.0 && target_width < 1.0)) {
    throw std::invalid_argument("target width must lie in (0, 1)");
  }
  if (!system.is_finite()) throw std::invalid_argument("render_cover needs a finite system");
  CoverSet out;
  out.fingerprint = system.fingerprint();
  Expander ex{system, std::log(target_width), cap, system.digits(), system.vertical_digits(), out};
  for (Digit d : ex.digits) {
    if (!(system.a(d) < 1.0)) {
      throw std::invalid_argument("digit " + to_string(d) + " does not contract; exclude it first");
    }
  }
  Word word;
  ex.expand(word, 0.0);
  return out;
}

std::size_t count_boxes(const std::vector<CoverRectangle>& rects, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("box size must be positive");
  std::unordered_set<std::uint64_t> boxes;
  auto span = [eps](double lo, double hi) {
    const auto a = static_cast<std::int64_t>(std::floor(lo / eps));
    const auto b = static_cast<std::int64_t>(std::ceil(hi / eps)) - 1;
    return std::pair{a, std::max(a, b)};
  };
  for (const CoverRectangle& r : rects) {
    const auto [x0, x1] = span(r.h.lo, r.h.hi);
    const auto [y0, y1] = span(r.v.lo, r.v.hi);
    for (std::int64_t x = x0; x <= x1; ++x) {
      for (std::int64_t y = y0; y <= y1; ++y) {
        boxes.insert((static_cast<std::uint64_t>(x) << 32) ^ static_cast<std::uint64_t>(y & 0xffffffff));
      }
    }
  }
  return boxes.size();
}

std::vector<double> default_scales() {
  std::vector<double> s;
  for (int k = 4; k <= 10; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

BoxDimension estimate_dimension(const CoverSet& cover, const std::vector<double>& scales) {
  if (!cover.complete) throw Error("cover is partial (rectangle cap reached); refusing to estimate");
  if (cover.rectangles.empty()) throw Error("empty cover");
  std::vector<double> sorted = scales;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double finest = 2.0 * cover.max_width();
  BoxDimension out;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    ScaleCount sc{sorted[k], count_boxes(cover.rectangles, sorted[k]), false};
    sc.used = k >= 2 && sorted[k] >= finest * (1.0 - 1e-12);
    if (sc.used) {
      xs.push_back(std::log(1.0 / sc.epsilon));
      ys.push_back(std::log(static_cast<double>(sc.count)));
    }
    out.counts.push_back(sc);
  }
  if (xs.size() < 3) {
    throw Error("fewer than 3 usable scales; render the cover at a finer target width");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k] / n;
    my += ys[k] / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  out.slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - my - out.slope * (xs[k] - mx);
    rss += r * r;
  }
  out.std_error = xs.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return out;
}

}  // namespace incdim
