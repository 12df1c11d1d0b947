#include "doctest.h"

#include <cmath>
#include <limits>

#include "incdim/spectrum.hpp"

using namespace incdim;

namespace {

INCSystem bm21() {
  const int t[] = {2, 1};
  return bedford_mcmullen_rows(2, 4, t);
}

std::shared_ptr<const PotentialTable> table(const Potential& phi, const INCSystem& s) {
  const std::vector<Digit> d = s.digits();
  return std::make_shared<const PotentialTable>(PotentialTable::tabulate(phi, d));
}

OptConfig quick() {
  OptConfig c;
  c.starts = 4;
  c.threads = 1;
  return c;
}

// Fraction a of mass on the two-cell row of BM(2, 4, (2, 1)): the best
// measure is uniform inside each row, so D = a/2 + H(a)/log 2.
double bm_row_oracle(double a) {
  double h = 0.0;
  for (double x : {a, 1.0 - a}) {
    if (x > 0) h -= x * std::log(x);
  }
  return a / 2 + h / std::log(2.0);
}

}  // namespace

TEST_CASE("row-frequency spectrum of a carpet matches the closed form") {
  const INCSystem s = bm21();
  const auto row0 = table(potentials::row_indicator(0), s);
  std::vector<double> alphas;
  for (int k = 0; k <= 10; ++k) alphas.push_back(k / 10.0);
  alphas.push_back(1.2);
  const std::vector<SpectrumRow> rows = spectrum_curve(s, row0, alphas, 1, quick());
  REQUIRE(rows.size() == alphas.size());
  CHECK(rows.front().endpoint);
  CHECK(rows[10].endpoint);
  CHECK_FALSE(rows.back().feasible);
  const double free_max = maximize_dimension(s, 1, {}, quick()).dimension.upper;
  for (std::size_t k = 0; k <= 10; ++k) {
    REQUIRE(rows[k].feasible);
    CHECK(rows[k].result->dimension.lower == doctest::Approx(bm_row_oracle(alphas[k])).epsilon(1e-7));
    CHECK(rows[k].result->dimension.upper <= free_max + 1e-7);
  }
  CHECK(rows[0].result->dimension.upper == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(rows[10].result->dimension.lower == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("Gauss digit-average spectrum is bounded and continuous") {
  std::vector<std::pair<long, int>> digits;
  for (long n = 2; n <= 20; ++n) digits.emplace_back(n, static_cast<int>(n % 2));
  const INCSystem s = gauss_renyi(digits);
  const auto phi = table(potentials::digit_value(), s);
  std::vector<double> alphas;
  for (double a = 2.0; a <= 8.0 + 1e-9; a += 0.25) alphas.push_back(a);
  const std::vector<SpectrumRow> rows = spectrum_curve(s, phi, alphas, 1, quick());
  CHECK(rows.front().endpoint);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    REQUIRE(rows[k].feasible);
    const double d = rows[k].result->dimension.upper;
    CHECK(d >= 0.0);
    CHECK(d < 2.0);
    // The curve leaves the minimum of phi with unbounded slope, so the
    // jump bound starts one unit in.
    if (alphas[k] >= 3.25) {
      CHECK(std::fabs(d - rows[k - 1].result->dimension.upper) <= 0.1);
    }
  }
}

TEST_CASE("level-set stages decrease to the limit value") {
  const INCSystem s = bm21();
  SpectrumRequest req{s, {table(potentials::row_indicator(0), s)}, {1.0}, {2, 4, 8, 16},
                      {DigitTruncation::from_digits(s.digits())}, 1, quick()};
  const LevelSetReport rep = level_set_dim(req);
  REQUIRE(rep.stages.size() == 4);
  CHECK(rep.nonincreasing);
  CHECK_FALSE(rep.empty);
  // The unconstrained optimum has row frequency 1/(1 + 2^-1/2).
  const double a_star = 1.0 / (1.0 + std::sqrt(0.5));
  for (const LevelSetStage& st : rep.stages) {
    REQUIRE(st.feasible);
    // Otherwise the supremum over the open window sits on its lower edge.
    const double edge = 1.0 - 1.0 / st.m;
    const double expected = bm_row_oracle(edge < a_star ? a_star : edge);
    CHECK(st.result->dimension.upper == doctest::Approx(expected).epsilon(1e-6));
    CHECK(st.result->dimension.upper >= 0.5);
  }
  CHECK(rep.trend < 0.0);
  CHECK(std::fabs(rep.richardson - 0.5) < std::fabs(rep.limit - 0.5));
}

TEST_CASE("stage constraints follow the targets") {
  const INCSystem s = bm21();
  const auto phi = table(potentials::row_indicator(0), s);
  SpectrumRequest req{s, {phi, phi, phi}, {std::numeric_limits<double>::infinity()}, {1}, {}, 1, {}};
  const auto c2 = stage_constraints(req, 2);
  REQUIRE(c2.size() == 2);
  CHECK(std::holds_alternative<LowerBound>(c2[0].kind));
  CHECK(std::get<LowerBound>(c2[0].kind).m == 2.0);
  CHECK(stage_constraints(req, 7).size() == 3);
  req.targets = {0.5, -std::numeric_limits<double>::infinity(), 0.1};
  const auto c3 = stage_constraints(req, 3);
  CHECK(std::get<Window>(c3[0].kind).m == 3.0);
  CHECK(std::holds_alternative<UpperBound>(c3[1].kind));
  req.targets = {0.5, 0.2};
  CHECK_THROWS(stage_constraints(req, 2));
}

TEST_CASE("infeasible grid cells are reported, not fatal") {
  const INCSystem s = bm21();
  const auto phi = table(potentials::row_indicator(0), s);
  SpectrumRequest req{s, {phi}, {std::numeric_limits<double>::infinity()}, {1, 2},
                      {DigitTruncation::from_digits(s.digits())}, 1, quick()};
  // The row frequency never exceeds 1, so both cells are empty.
  const LevelSetGrid g = level_set_grid(req);
  CHECK_FALSE(g.cells[0][0].feasible);
  CHECK_FALSE(g.cells[1][0].note.empty());
}
