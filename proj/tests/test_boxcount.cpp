#include "doctest.h"

#include <cmath>
#include <random>

#include "incdim/boxcount.hpp"

using namespace incdim;

namespace {

INCSystem bm21() {
  const int t[] = {2, 1};
  return bedford_mcmullen_rows(2, 4, t);
}

INCSystem full_grid() {
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 4; ++j) cells.emplace_back(i, j);
  }
  return bedford_mcmullen(2, 4, cells);
}

}  // namespace

TEST_CASE("cover of BM(2,4,t=(2,1)) at 1/64") {
  const CoverSet c = render_cover(bm21(), 1.0 / 64);
  CHECK(c.complete);
  CHECK(c.depth == 3);
  // 27 words of length 3, each with the 8 vertical continuations of length 3.
  CHECK(c.rectangles.size() == 27 * 8);
  for (const CoverRectangle& r : c.rectangles) {
    CHECK(r.h.width() == doctest::Approx(1.0 / 64));
    CHECK(r.v.width() == doctest::Approx(1.0 / 64));
    CHECK(r.fiber_depth == 6);
  }
}

TEST_CASE("full grid cover tiles the square") {
  const CoverSet c = render_cover(full_grid(), 1.0 / 16);
  CHECK(c.rectangles.size() == 256);
  double area = 0.0;
  for (const CoverRectangle& r : c.rectangles) area += r.h.width() * r.v.width();
  CHECK(area == doctest::Approx(1.0));
  CHECK(count_boxes(c.rectangles, 1.0 / 16) == 256);
  CHECK(count_boxes(c.rectangles, 1.0 / 4) == 16);
  const BoxDimension d = estimate_dimension(render_cover(full_grid(), 1.0 / 1024));
  CHECK(d.slope == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("single map cover is one rectangle") {
  const INCSystem one = truncate(bm21(), DigitTruncation{{{1, {0}}}});
  for (double t : {0.3, 0.01, 1e-5}) CHECK(render_cover(one, t).rectangles.size() == 1);
}

TEST_CASE("degenerate segment has slope one") {
  CoverSet seg;
  for (int k = 0; k < 1024; ++k) seg.rectangles.push_back({{k / 1024.0, (k + 1) / 1024.0}, {0.0, 0.0}, 1, 1});
  const BoxDimension d = estimate_dimension(seg);
  CHECK(d.slope == doctest::Approx(1.0).epsilon(1e-12));
  for (const ScaleCount& s : d.counts) CHECK(s.count == static_cast<std::size_t>(std::lround(1 / s.epsilon)));
}

TEST_CASE("box counts are monotone and slopes stay in range") {
  const CoverSet c = render_cover(bm21(), 1.0 / 1024);
  const BoxDimension d = estimate_dimension(c);
  for (std::size_t k = 1; k < d.counts.size(); ++k) CHECK(d.counts[k].count >= d.counts[k - 1].count);
  CHECK(d.slope >= 0.0);
  CHECK(d.slope <= 2.0);
  CHECK(std::fabs(d.slope - 1.2716) <= 0.05);

  const BoxDimension finer = estimate_dimension(render_cover(bm21(), 1.0 / 2048));
  CHECK(finer.slope >= d.slope - 3 * d.std_error - 1e-12);
}

TEST_CASE("cover contains sampled attractor points") {
  const std::pair<long, int> g[] = {{2, 0}, {3, 1}, {4, 0}, {5, 1}};
  const INCSystem gauss = gauss_renyi(g);
  const LGRow rows[] = {{0.5, {0.2, 0.3}}, {0.3, {0.25}}};
  const INCSystem lg = lalley_gatzouras(rows);
  std::mt19937_64 rng(99);
  for (const INCSystem* s : {&gauss, &lg, static_cast<const INCSystem*>(nullptr)}) {
    if (s == nullptr) break;
    const CoverSet c = render_cover(*s, 1.0 / 64);
    REQUIRE(c.complete);
    const std::vector<Digit> digits = s->digits();
    std::discrete_distribution<std::size_t> pick({0.4, 0.3, 0.2, 0.1});
    std::uniform_int_distribution<std::size_t> any(0, digits.size() - 1);
    for (int trial = 0; trial < 2500; ++trial) {
      Word w(60);
      for (Digit& d : w) d = digits[digits.size() == 4 ? pick(rng) : any(rng)];
      const auto [x, y] = coding_point(*s, w);
      bool inside = false;
      for (const CoverRectangle& r : c.rectangles) {
        if (r.contains(x, y, 1e-12)) {
          inside = true;
          break;
        }
      }
      CHECK(inside);
    }
  }
}

TEST_CASE("partial covers are refused") {
  const CoverSet c = render_cover(bm21(), 1.0 / 1024, 100);
  CHECK_FALSE(c.complete);
  CHECK_THROWS_AS(estimate_dimension(c), Error);
  CHECK_THROWS_AS(estimate_dimension(render_cover(bm21(), 0.2)), Error);
}
