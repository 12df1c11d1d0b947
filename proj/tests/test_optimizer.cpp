#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "incdim/optimizer.hpp"
#include "incdim/simplex_lp.hpp"

using namespace incdim;

namespace {

INCSystem bm21() {
  const int t[] = {2, 1};
  return bedford_mcmullen_rows(2, 4, t);
}

// D for a level-1 measure on a Bedford-McMullen carpet, written out from the
// entropy and exponent formulas without touching the library.
double bm_dimension(const std::vector<double>& p, const std::vector<int>& rows, int m, int n) {
  double h = 0.0;
  std::vector<double> marg(static_cast<std::size_t>(m), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0) h -= p[k] * std::log(p[k]);
    marg[static_cast<std::size_t>(rows[k])] += p[k];
  }
  double hv = 0.0;
  for (double x : marg) {
    if (x > 0) hv -= x * std::log(x);
  }
  return (h - hv) / std::log(static_cast<double>(n)) + hv / std::log(static_cast<double>(m));
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

}  // namespace

TEST_CASE("closed form oracle") {
  const int a[] = {2, 1};
  const int b[] = {4, 4};
  const int c[] = {1, 1};
  CHECK(mcmullen_closed_form(2, 4, a) == doctest::Approx(std::log(std::sqrt(2.0) + 1) / std::log(2.0)));
  CHECK(mcmullen_closed_form(2, 4, a) == doctest::Approx(1.271553).epsilon(1e-6));
  CHECK(mcmullen_closed_form(2, 4, b) == doctest::Approx(2.0));
  CHECK(mcmullen_closed_form(2, 4, c) == doctest::Approx(1.0));
  const int z[] = {0, 0};
  CHECK_THROWS(mcmullen_closed_form(2, 4, z));
  CHECK_THROWS(mcmullen_closed_form(1, 4, a));
}

TEST_CASE("brute-force simplex grid agrees with the closed form") {
  const std::vector<int> rows{0, 0, 1};
  double best = 0.0;
  const int res = 1000;
  for (int i = 0; i <= res; ++i) {
    for (int j = 0; i + j <= res; ++j) {
      const std::vector<double> p{i / double(res), j / double(res), (res - i - j) / double(res)};
      best = std::max(best, bm_dimension(p, rows, 2, 4));
    }
  }
  const int t[] = {2, 1};
  CHECK(best <= mcmullen_closed_form(2, 4, t) + 1e-12);
  CHECK(best == doctest::Approx(mcmullen_closed_form(2, 4, t)).epsilon(1e-5));
}

TEST_CASE("LP feasibility") {
  LinearRows eq;
  eq.a = {{1.0, 0.0, 0.0}};
  eq.b = {0.25};
  LinearRows le;
  le.a = {{0.0, 1.0, 0.0}};
  le.b = {0.5};
  const FeasibilityResult ok = simplex_feasibility(eq, le, 3);
  REQUIRE(ok.feasible);
  CHECK(ok.point[0] == doctest::Approx(0.25));
  CHECK(ok.point[1] <= 0.5 + 1e-12);
  CHECK(std::accumulate(ok.point.begin(), ok.point.end(), 0.0) == doctest::Approx(1.0));

  eq.b = {1.5};
  const FeasibilityResult bad = simplex_feasibility(eq, le, 3);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.violation == doctest::Approx(0.5));
}

TEST_CASE("objective gradient matches central differences") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  double worst = 0.0;
  for (int sys = 0; sys < 10; ++sys) {
    std::vector<LGRow> rows;
    const int nrows = 2 + sys % 2;
    for (int i = 0; i < nrows; ++i) {
      LGRow r;
      r.height = 0.9 / nrows;
      for (int j = 0; j < 2 + (sys + i) % 3; ++j) r.widths.push_back(std::min(u(rng) * r.height, 0.2));
      rows.push_back(r);
    }
    const INCSystem s = lalley_gatzouras(rows);
    const int q = 1 + sys % 2;
    const DimensionObjective f(s, s.digits(), q, 2);
    std::exponential_distribution<double> e(1.0);
    for (int pt = 0; pt < 10; ++pt) {
      std::vector<double> p(f.size());
      for (double& x : p) x = e(rng) + 0.01;
      const double tot = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& x : p) x /= tot;
      std::vector<double> g(f.size());
      f.value_and_gradient(p, g);
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double h = 1e-6;
        std::vector<double> a = p;
        std::vector<double> b = p;
        a[k] += h;
        b[k] -= h;
        const double fd = (f.value(a) - f.value(b)) / (2 * h);
        worst = std::max(worst, std::fabs(fd - g[k]) / std::max(1.0, std::fabs(g[k])));
      }
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("Gauss objective gradient matches central differences") {
  const std::pair<long, int> d[] = {{2, 0}, {3, 1}, {4, 0}, {6, 1}};
  const INCSystem s = gauss_renyi(d);
  const DimensionObjective f(s, s.digits(), 1, 3);
  std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  std::vector<double> g(4);
  f.value_and_gradient(p, g);
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> a = p;
    std::vector<double> b = p;
    a[k] += 1e-6;
    b[k] -= 1e-6;
    CHECK(g[k] == doctest::Approx((f.value(a) - f.value(b)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("Bedford-McMullen optima match the closed form") {
  struct Case {
    int m;
    int n;
    std::vector<int> t;
  };
  const std::vector<Case> cases{{2, 4, {2, 1}}, {2, 4, {4, 4}}, {2, 4, {1, 1}}, {3, 5, {1, 3, 2}},
                                {2, 3, {3, 1}}};
  for (const Case& c : cases) {
    const INCSystem s = bedford_mcmullen_rows(c.m, c.n, c.t);
    const OptResult r = maximize_dimension(s, 1, {}, quick());
    CHECK(r.converged);
    CHECK(r.dimension.lower == doctest::Approx(mcmullen_closed_form(c.m, c.n, c.t)).epsilon(1e-9));
    CHECK(r.dimension.width() == 0.0);
  }
}

TEST_CASE("optimum beats the uniform measure and is reorder invariant") {
  const LGRow rows[] = {{0.5, {0.2, 0.3, 0.1}}, {0.3, {0.25, 0.05}}};
  const INCSystem s = lalley_gatzouras(rows);
  const OptResult r = maximize_dimension(s, 1, {}, quick());
  const Bracket u = dimension(s, BernoulliMeasure::uniform(s.digits()), 1);
  CHECK(r.dimension.lower >= u.lower - 1e-9);

  const LGRow swapped[] = {{0.5, {0.1, 0.3, 0.2}}, {0.3, {0.05, 0.25}}};
  const INCSystem s2 = lalley_gatzouras(swapped);
  const OptResult r2 = maximize_dimension(s2, 1, {}, quick());
  CHECK(r2.dimension.lower == doctest::Approx(r.dimension.lower).epsilon(1e-10));
  CHECK(r2.weights[0] == doctest::Approx(r.weights[2]).epsilon(1e-5));
  CHECK(r2.weights[3] == doctest::Approx(r.weights[4]).epsilon(1e-5));
}

TEST_CASE("equality constraint forces a single row") {
  const INCSystem s = bm21();
  const auto row0 = table(potentials::row_indicator(0), s);
  const OptResult one = maximize_dimension(s, 1, {{row0, Equality{1.0}}}, quick());
  CHECK(one.dimension.lower == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(one.residuals[0] <= 1e-8);
  const OptResult zero = maximize_dimension(s, 1, {{row0, Equality{0.0}}}, quick());
  CHECK(std::fabs(zero.dimension.upper) <= 1e-6);
}

TEST_CASE("window constraints are monotone in m and approach the equality value") {
  const INCSystem s = bm21();
  const auto row0 = table(potentials::row_indicator(0), s);
  const double alpha = 0.4;
  double prev = 10.0;
  for (double m : {2.0, 5.0, 20.0, 100.0, 1e6}) {
    const OptResult r = maximize_dimension(s, 1, {{row0, Window{alpha, m}}}, quick());
    CHECK(r.feasible);
    CHECK(r.dimension.lower <= prev + 1e-7);
    prev = r.dimension.lower;
  }
  const OptResult eq = maximize_dimension(s, 1, {{row0, Equality{alpha}}}, quick());
  CHECK(eq.dimension.lower == doctest::Approx(prev).epsilon(1e-4));
}

TEST_CASE("infeasible constraints raise a certificate") {
  const INCSystem s = bm21();
  const auto row0 = table(potentials::row_indicator(0), s);
  try {
    maximize_dimension(s, 1, {{row0, Equality{1.5}}}, quick());
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.certificate().violation == doctest::Approx(0.5));
    CHECK_FALSE(e.certificate().multipliers.empty());
  }
  CHECK_THROWS_AS(maximize_dimension(s, 1, {{row0, LowerBound{2.0}}}, quick()), InfeasibleError);
}

TEST_CASE("deterministic for a fixed seed") {
  const LGRow rows[] = {{0.5, {0.2, 0.3}}, {0.3, {0.25}}};
  const INCSystem s = lalley_gatzouras(rows);
  OptConfig c = quick();
  c.seed = 42;
  const OptResult a = maximize_dimension(s, 1, {}, c);
  const OptResult b = maximize_dimension(s, 1, {}, c);
  CHECK(a.weights == b.weights);
  c.threads = 3;
  const OptResult t = maximize_dimension(s, 1, {}, c);
  CHECK(a.weights == t.weights);
}

TEST_CASE("truncation sweep is nondecreasing") {
  const INCSystem g = gauss_renyi(GaussDigitRule::n_mod_2, 64);
  const INCSystem s = exclude_violations(g, validate(g));
  std::vector<DigitTruncation> schedule;
  for (long n : {4, 8, 16}) schedule.push_back(truncation_by_index(s, n));
  const SweepResult r = truncation_sweep(s, schedule, 1, {}, quick());
  CHECK(r.nondecreasing);
  REQUIRE(r.stages.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(r.stages[k].objective >= r.stages[k - 1].objective - 1e-9);
  }

  const INCSystem bm = bm21();
  const SweepResult b = truncation_sweep(
      bm, {DigitTruncation{{{0, {0}}}}, DigitTruncation{{{0, {0, 1}}, {1, {0}}}}}, 1, {}, quick());
  CHECK(b.stages[0].dimension.upper == 0.0);
  CHECK(b.stages[1].dimension.lower >= b.stages[0].dimension.lower);
}
