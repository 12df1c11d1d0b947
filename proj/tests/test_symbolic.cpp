#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "incdim/symbolic.hpp"

using namespace incdim;

namespace {

INCSystem bm21() {
  const int t[] = {2, 1};
  return bedford_mcmullen_rows(2, 4, t);
}

}  // namespace

TEST_CASE("l_index on Bedford-McMullen words") {
  const INCSystem s = bm21();
  const Word w3{{0, 0}, {0, 1}, {1, 0}};
  const std::vector<int> ext{0, 1, 0, 0};
  CHECK(l_index(s, w3, ext) == 6);
  const Word w1{{1, 0}};
  CHECK(l_index(s, w1, ext) == 2);
  CHECK_THROWS_AS(l_index(s, w3, std::vector<int>{0, 1}), Error);
}

TEST_CASE("l_index and ratio on a Gauss word") {
  const INCSystem s = gauss_renyi(GaussDigitRule::all, 10);
  const Word w{{0, 2}, {1, 3}};
  const std::vector<int> ext{0, 0, 1, 1, 0};
  const int L = l_index(s, w, ext);
  CHECK(L == 6);
  CHECK(ratio_check(s, w, ext, L) == doctest::Approx(16.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("ratio is exactly one for matched Bedford-McMullen powers") {
  const INCSystem s = bm21();
  const Word w{{0, 0}, {0, 1}, {1, 0}};
  const std::vector<int> ext{1, 1, 1};
  CHECK(ratio_check(s, w, ext, 6) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("approximate squares of Bedford-McMullen words are squares") {
  const INCSystem s = bm21();
  const Word w{{0, 0}, {0, 1}};
  const std::vector<int> ext{0, 0};
  const CoverRectangle r = approximate_square(s, w, ext);
  CHECK(r.h.width() == doctest::Approx(1.0 / 16));
  CHECK(r.v.width() == doctest::Approx(1.0 / 16));
  CHECK(r.depth == 2);
  CHECK(r.fiber_depth == 4);

  const CoverRectangle one = approximate_square(s, Word{{1, 0}}, std::vector<int>{0});
  CHECK(one.h.width() == doctest::Approx(0.25));
  CHECK(one.v.width() == doctest::Approx(0.25));
  CHECK(one.v.lo == doctest::Approx(0.5));
}

TEST_CASE("Gauss approximate square horizontal side") {
  const INCSystem s = gauss_renyi(GaussDigitRule::all, 10);
  const Word w{{0, 2}, {1, 3}};
  const std::vector<int> ext{0, 0, 0, 0};
  const CoverRectangle r = approximate_square(s, w, ext);
  // f_2(f_3(x)) = (3 + x) / (7 + 2x)
  CHECK(r.h.lo == doctest::Approx(3.0 / 7.0));
  CHECK(r.h.hi == doctest::Approx(4.0 / 9.0));
  // Width lies between the inf and sup derivative products.
  const Branch b2 = GaussBranch{2};
  const Branch b3 = GaussBranch{3};
  const Branch* word[] = {&b2, &b3};
  const LogDerivRange d = composed_log_deriv_range(word);
  CHECK(std::log(r.h.width()) >= d.log_inf - 1e-12);
  CHECK(std::log(r.h.width()) <= d.log_sup + 1e-12);
}

TEST_CASE("random words satisfy the fiber and ratio bounds and nest") {
  // Digit 1 breaks dominance, and the ratio bound relies on it.
  const INCSystem raw = gauss_renyi(GaussDigitRule::n_mod_2, 40);
  const INCSystem gauss = exclude_violations(raw, validate(raw));
  const LGRow rows[] = {{0.5, {0.2, 0.3}}, {0.3, {0.25}}, {0.2, {0.1, 0.15, 0.05}}};
  const INCSystem lg = lalley_gatzouras(rows);
  std::mt19937_64 rng(11);
  for (const INCSystem* s : {&gauss, &lg}) {
    const std::vector<Digit> digits = s->digits();
    const std::vector<int> rowset = s->vertical_digits();
    std::uniform_int_distribution<std::size_t> pick(0, digits.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_row(0, rowset.size() - 1);
    std::uniform_int_distribution<int> len(1, 12);
    for (int trial = 0; trial < 2000; ++trial) {
      Word w(static_cast<std::size_t>(len(rng)));
      for (Digit& d : w) d = digits[pick(rng)];
      std::vector<int> ext(200);
      for (int& i : ext) i = rowset[pick_row(rng)];
      const int L = l_index(*s, w, ext);
      CHECK(L >= static_cast<int>(w.size()));
      const double r = ratio_check(*s, w, ext, L);
      CHECK(r >= 1.0 - 1e-12);
      CHECK(r < 1.0 / s->b_min());

      const CoverRectangle a = approximate_square(*s, w, ext);
      // The child keeps the parent's vertical sequence.
      std::vector<Digit> in_row;
      for (Digit d : digits) {
        if (d.row == ext[0]) in_row.push_back(d);
      }
      Word longer = w;
      longer.push_back(in_row[pick(rng) % in_row.size()]);
      std::vector<int> ext2(ext.begin() + 1, ext.end());
      const CoverRectangle b = approximate_square(*s, longer, ext2);
      CHECK(a.h.contains(b.h, 1e-12));
      CHECK(a.v.contains(b.v, 1e-12));
    }
  }
}

TEST_CASE("rectangle serialization uses four fields per line") {
  std::ostringstream out;
  const CoverRectangle r{{0.0, 0.25}, {0.5, 0.75}, 1, 2};
  write_rectangles(out, std::span<const CoverRectangle>(&r, 1));
  CHECK(out.str() == "0 0.25 0.5 0.75\n");
}

TEST_CASE("coding point lies in the approximate square") {
  const INCSystem s = bm21();
  const Word w{{0, 1}, {1, 0}, {0, 0}, {0, 1}, {1, 0}, {0, 1}};
  const auto [x, y] = coding_point(s, w);
  const Word prefix(w.begin(), w.begin() + 3);
  const std::vector<int> ext = project(std::span<const Digit>(w).subspan(3));
  const CoverRectangle r = approximate_square(s, prefix, ext);
  CHECK(r.contains(x, y, 1e-12));
}
