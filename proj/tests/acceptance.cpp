// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "incdim/boxcount.hpp"
#include "incdim/numeric.hpp"
#include "incdim/spectrum.hpp"
#include "incdim/symbolic.hpp"

using namespace incdim;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double x, int digits = 7) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  for (double& x : w) x = e(rng);
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s;
  return w;
}

INCSystem bm21() {
  const int t[] = {2, 1};
  return bedford_mcmullen_rows(2, 4, t);
}

std::shared_ptr<const PotentialTable> table(const Potential& phi, const INCSystem& s) {
  const std::vector<Digit> d = s.digits();
  return std::make_shared<const PotentialTable>(PotentialTable::tabulate(phi, d));
}

Verdict oracle_agreement() {
  struct Carpet {
    int m;
    int n;
    std::vector<int> t;
  };
  const std::vector<Carpet> carpets = {
      {2, 4, {2, 1}}, {2, 4, {4, 4}}, {2, 4, {1, 1}}, {3, 9, {1, 2, 3}}, {3, 5, {2, 0, 4}},
  };
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string values;
  for (const Carpet& c : carpets) {
    const double closed = mcmullen_closed_form(c.m, c.n, c.t);
    const OptResult r = maximize_dimension(bedford_mcmullen_rows(c.m, c.n, c.t), 1, {});
    worst = std::max({worst, std::fabs(r.dimension.lower - closed), std::fabs(r.dimension.upper - closed)});
    values += (values.empty() ? "" : " ") + num(r.dimension.upper);
  }
  const double secs = since(t0);
  return {worst <= 1e-6 && secs <= 5.0,
          "max |opt - closed form| = " + num(worst, 3) + " over {" + values + "}, " + num(secs, 3) + " s (limit 5 s)"};
}

Verdict escape_of_mass() {
  const auto t0 = Clock::now();
  const INCSystem g = gauss_renyi(GaussDigitRule::n_mod_2, 1024);
  SpectrumRequest req{g, {}, {0.0}, {2, 4, 8, 16}, {}, 1, {}};
  const INCSystem widest = truncate(g, truncation_by_index(g, 1024));
  for (long k = 1; k <= 16; ++k) req.potentials.push_back(table(potentials::digit_indicator(k), widest));
  for (long n : {16, 64, 256, 1024}) req.truncations.push_back(truncation_by_index(g, n));
  const LevelSetGrid grid = level_set_grid(req);
  const double secs = since(t0);

  bool down_m = true;
  bool up_n = true;
  std::ostringstream cells;
  for (std::size_t i = 0; i < grid.m_values.size(); ++i) {
    for (std::size_t j = 0; j < grid.trunc_sizes.size(); ++j) {
      const LevelSetStage& c = grid.cells[i][j];
      if (!c.feasible) continue;
      const double up = c.result->dimension.upper;
      if (i > 0 && grid.cells[i - 1][j].feasible && up > grid.cells[i - 1][j].result->dimension.upper + 1e-6) {
        down_m = false;
      }
      if (j > 0 && grid.cells[i][j - 1].feasible && up < grid.cells[i][j - 1].result->dimension.upper - 1e-6) {
        up_n = false;
      }
    }
  }
  for (std::size_t s = 0; s < grid.m_values.size(); ++s) {
    const LevelSetStage& c = grid.cells[s][s];
    cells << " (m=" << c.m << ",N=" << c.trunc_size << ")=";
    cells << (c.feasible ? "[" + num(c.result->dimension.lower, 5) + "," + num(c.result->dimension.upper, 5) + "]"
                         : std::string("infeasible"));
  }
  const LevelSetStage& last = grid.cells.back().back();
  const bool contains = last.feasible && last.result->dimension.lower - 0.05 <= 1.5 &&
                        1.5 <= last.result->dimension.upper + 0.05;
  const bool fast = secs <= 300.0;
  std::string detail = std::string("(a) upper brackets nonincreasing in m: ") + (down_m ? "yes" : "no") +
                       "; (b) nondecreasing in truncation: " + (up_n ? "yes" : "no") +
                       "; (c) final bracket " +
                       (last.feasible ? "[" + num(last.result->dimension.lower) + ", " +
                                            num(last.result->dimension.upper) + "]"
                                      : std::string("infeasible")) +
                       " vs 1.5 +- 0.05: " + (contains ? "yes" : "no") + "; " + num(secs, 4) +
                       " s (limit 300 s); diagonal:" + cells.str();
  return {down_m && up_n && contains && fast, detail};
}

Verdict box_count() {
  const auto t0 = Clock::now();
  const CoverSet cover = render_cover(bm21(), std::ldexp(1.0, -10));
  const BoxDimension d = estimate_dimension(cover);
  const double secs = since(t0);
  return {std::fabs(d.slope - 1.2716) <= 0.05 && secs <= 60.0,
          "slope " + num(d.slope) + " (stderr " + num(d.std_error, 3) + ") vs 1.2716 +- 0.05, " +
              std::to_string(cover.rectangles.size()) + " rectangles, " + num(secs, 3) + " s (limit 60 s)"};
}

Verdict gradient() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  double worst = 0.0;
  int points = 0;
  for (int sys = 0; sys < 10; ++sys) {
    std::vector<LGRow> rows;
    const int nrows = 2 + sys % 3;
    for (int i = 0; i < nrows; ++i) {
      LGRow r;
      r.height = 0.95 / nrows;
      for (int j = 0; j < 2 + (sys + i) % 3; ++j) r.widths.push_back(std::min(u(rng) * r.height, 0.2));
      rows.push_back(r);
    }
    const INCSystem s = lalley_gatzouras(rows);
    const DimensionObjective f(s, s.digits(), 1 + sys % 2, 2);
    for (int pt = 0; pt < 100; ++pt, ++points) {
      std::vector<double> p = dirichlet(rng, f.size());
      for (double& x : p) x = 0.98 * x + 0.02 / static_cast<double>(p.size());
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
  return {worst <= 1e-5, "max relative error " + num(worst, 3) + " over " + std::to_string(points) +
                             " points on 10 systems (limit 1e-5)"};
}

Verdict entropy_identity() {
  std::mt19937_64 rng(77);
  double worst_h = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Digit> support;
    const int rows = 1 + trial % 4;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j <= (trial + i) % 4; ++j) support.push_back({i, j});
    }
    const int q = 1 + trial % 3;
    const BlockLayout l(support.size(), q);
    const EntropyStats h = entropy_stats(BernoulliMeasure(support, q, dirichlet(rng, l.count)));
    worst_h = std::max(worst_h, std::fabs(h.conditional + h.vertical - h.total));
  }
  const LGRow lg_rows[] = {{0.5, {0.2, 0.3}}, {0.3, {0.25}}};
  const INCSystem systems[] = {bm21(), lalley_gatzouras(lg_rows)};
  double worst_lift = 0.0;
  for (const INCSystem& s : systems) {
    for (int trial = 0; trial < 20; ++trial) {
      const BernoulliMeasure mu(s.digits(), 1, dirichlet(rng, s.digits().size()));
      const Bracket d1 = dimension(s, mu, 1);
      for (int q : {2, 3, 4}) {
        const Bracket dq = dimension(s, lift_to_level(mu, q), q);
        worst_lift = std::max({worst_lift, std::fabs(dq.lower - d1.lower), std::fabs(dq.upper - d1.upper)});
      }
    }
  }
  return {worst_h <= 1e-12 && worst_lift <= 1e-9,
          "entropy identity error " + num(worst_h, 3) + " on 1000 measures (limit 1e-12); lift error " +
              num(worst_lift, 3) + " for q = 2, 3, 4 (limit 1e-9)"};
}

// Birkhoff average of 2 log(a_k + x_{k+1}) for an i.i.d. digit sequence.
double monte_carlo_lyapunov(const std::vector<long>& labels, const std::vector<double>& p, std::size_t steps,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
  std::vector<long> seq(steps + 64);
  for (long& a : seq) a = labels[pick(rng)];
  double x = 0.5;
  NeumaierSum sum;
  for (std::size_t k = seq.size(); k-- > 0;) {
    if (k < steps) sum.add(2.0 * std::log(static_cast<double>(seq[k]) + x));
    x = 1.0 / (static_cast<double>(seq[k]) + x);
  }
  return sum.value() / static_cast<double>(steps);
}

Verdict bracket_certification() {
  const std::pair<long, int> digits[] = {{2, 0}, {3, 1}, {4, 0}, {5, 1}, {7, 1}};
  const INCSystem s = gauss_renyi(digits);
  const std::vector<double> p{0.3, 0.25, 0.2, 0.15, 0.1};
  const BernoulliMeasure mu(s.digits(), 1, p);
  const double mc = monte_carlo_lyapunov({2, 3, 4, 5, 7}, p, 1000000, 5);
  const double C = std::log(4.0);
  bool nested = true;
  bool narrow = true;
  bool contains = true;
  Bracket prev{-1e300, 1e300, 0};
  std::string widths;
  for (int depth : {1, 2, 4, 8}) {
    const Bracket b = lyapunov(s, mu, Axis::horizontal, depth);
    nested = nested && b.lower >= prev.lower - 1e-12 && b.upper <= prev.upper + 1e-12;
    narrow = narrow && b.width() <= C / depth + 1e-12;
    // Monte Carlo standard error is below 1e-3 at this sample size.
    contains = contains && b.lower - 5e-3 <= mc && mc <= b.upper + 5e-3;
    widths += (widths.empty() ? "" : " ") + num(b.width(), 4);
    prev = b;
  }
  return {nested && narrow && contains,
          std::string("nested: ") + (nested ? "yes" : "no") + "; widths {" + widths + "} <= log4/depth: " +
              (narrow ? "yes" : "no") + "; Monte Carlo " + num(mc) + " inside all: " + (contains ? "yes" : "no")};
}

Verdict symbolic_invariants() {
  const INCSystem raw = gauss_renyi(GaussDigitRule::n_mod_2, 40);
  const INCSystem gauss = exclude_violations(raw, validate(raw));
  const LGRow rows[] = {{0.5, {0.2, 0.3}}, {0.3, {0.25}}, {0.2, {0.1, 0.15, 0.05}}};
  const INCSystem lg = lalley_gatzouras(rows);
  std::mt19937_64 rng(11);
  long bad_l = 0;
  long bad_ratio = 0;
  long bad_nest = 0;
  long words = 0;
  for (const INCSystem* s : {&gauss, &lg}) {
    const std::vector<Digit> digits = s->digits();
    const std::vector<int> rowset = s->vertical_digits();
    std::uniform_int_distribution<std::size_t> pick(0, digits.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_row(0, rowset.size() - 1);
    std::uniform_int_distribution<int> len(1, 12);
    for (int trial = 0; trial < 5000; ++trial, ++words) {
      Word w(static_cast<std::size_t>(len(rng)));
      for (Digit& d : w) d = digits[pick(rng)];
      std::vector<int> ext(200);
      for (int& i : ext) i = rowset[pick_row(rng)];
      const int L = l_index(*s, w, ext);
      if (L < static_cast<int>(w.size())) ++bad_l;
      const double r = ratio_check(*s, w, ext, L);
      if (!(r >= 1.0 - 1e-12 && r < 1.0 / s->b_min())) ++bad_ratio;
      const CoverRectangle a = approximate_square(*s, w, ext);
      std::vector<Digit> in_row;
      for (Digit d : digits) {
        if (d.row == ext[0]) in_row.push_back(d);
      }
      Word longer = w;
      longer.push_back(in_row[pick(rng) % in_row.size()]);
      const std::vector<int> ext2(ext.begin() + 1, ext.end());
      const CoverRectangle b = approximate_square(*s, longer, ext2);
      if (!a.h.contains(b.h, 1e-12) || !a.v.contains(b.v, 1e-12)) ++bad_nest;
    }
  }
  return {bad_l == 0 && bad_ratio == 0 && bad_nest == 0,
          std::to_string(words) + " words: L_n < n in " + std::to_string(bad_l) + ", ratio outside [1, 1/b_min) in " +
              std::to_string(bad_ratio) + ", nesting broken in " + std::to_string(bad_nest)};
}

Verdict spectrum_sanity() {
  const INCSystem s = bm21();
  const auto row0 = table(potentials::row_indicator(0), s);
  const std::vector<SpectrumRow> ends = spectrum_curve(s, row0, {0.0, 1.0}, 1, {});
  const bool ends_ok = ends[0].feasible && ends[1].feasible &&
                       std::fabs(ends[0].result->dimension.upper) <= 1e-6 &&
                       std::fabs(ends[0].result->dimension.lower) <= 1e-6 &&
                       std::fabs(ends[1].result->dimension.lower - 0.5) <= 1e-6 &&
                       std::fabs(ends[1].result->dimension.upper - 0.5) <= 1e-6;
  double worst = 0.0;
  for (double alpha : {0.25, 0.4, 0.75}) {
    const OptResult eq = maximize_dimension(s, 1, {{row0, Equality{alpha}}});
    const OptResult win = maximize_dimension(s, 1, {{row0, Window{alpha, 1e6}}});
    worst = std::max(worst, std::fabs(eq.dimension.upper - win.dimension.upper));
  }
  return {ends_ok && worst <= 1e-4,
          "D(alpha=0) = " + num(ends[0].result ? ends[0].result->dimension.upper : NAN) +
              ", D(alpha=1) = " + num(ends[1].result ? ends[1].result->dimension.upper : NAN) +
              " (limit 1e-6); max |equality - window(m=1e6)| = " + num(worst, 3) + " (limit 1e-4)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"1 oracle agreement", oracle_agreement},
      {"2 escape of mass", escape_of_mass},
      {"3 box-count cross-check", box_count},
      {"4 gradient correctness", gradient},
      {"5 entropy identity", entropy_identity},
      {"6 bracket certification", bracket_certification},
      {"7 symbolic invariants", symbolic_invariants},
      {"8 spectrum sanity", spectrum_sanity},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("criterion %s: %s | %s\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
