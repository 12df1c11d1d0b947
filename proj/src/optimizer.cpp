#include "incdim/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <thread>

#include "incdim/numeric.hpp"
#include "incdim/simplex_lp.hpp"

namespace incdim {

std::string describe(const ConstraintKind& kind) {
  struct V {
    std::string operator()(const Equality& e) const { return "= " + fmt17(e.alpha); }
    std::string operator()(const Window& w) const {
      return "in (" + fmt17(w.alpha) + " +- 1/" + fmt17(w.m) + ")";
    }
    std::string operator()(const LowerBound& b) const { return "> " + fmt17(b.m); }
    std::string operator()(const UpperBound& b) const { return "< -" + fmt17(b.m); }
  };
  return std::visit(V{}, kind);
}

// --- objective ---------------------------------------------------------------

namespace {

std::vector<std::size_t> vertical_map(const std::vector<Digit>& support, int level) {
  return BernoulliMeasure::uniform(support, level).vertical_unit_of_block();
}

std::size_t vertical_units(const std::vector<Digit>& support, int level) {
  const std::size_t a = BernoulliMeasure::uniform(support, 1).vertical_alphabet().size();
  std::size_t n = 1;
  for (int k = 0; k < level; ++k) n *= a;
  return n;
}

}  // namespace

DimensionObjective::DimensionObjective(const INCSystem& system, std::vector<Digit> support, int level,
                                       int depth, std::size_t budget)
    : support_(std::move(support)),
      level_(level),
      block_count_(BlockLayout(support_.size(), level).count),
      vertical_count_(vertical_units(support_, level)),
      vertical_of_block_(vertical_map(support_, level)),
      horizontal_(system, support_, level, Axis::horizontal, depth, budget),
      vertical_(system, support_, level, Axis::vertical, depth, budget) {}

double DimensionObjective::value(std::span<const double> p) const {
  return value_and_gradient(p, {});
}

double DimensionObjective::value_and_gradient(std::span<const double> p, std::span<double> grad) const {
  if (p.size() != block_count_) throw std::invalid_argument("weight vector has the wrong size");
  const bool want = !grad.empty();
  const double q = level_;
  std::vector<double> m(vertical_count_, 0.0);
  NeumaierSum h;
  for (std::size_t b = 0; b < block_count_; ++b) {
    h.add(-xlogx(p[b]));
    m[vertical_of_block_[b]] += p[b];
  }
  NeumaierSum hv_sum;
  for (double x : m) hv_sum.add(-xlogx(x));
  const double H = h.value() / q;
  const double Hv = hv_sum.value() / q;
  const double Hc = H - Hv;

  std::vector<double> hlo;
  std::vector<double> hhi;
  std::vector<double> vlo;
  std::vector<double> vhi;
  if (want) {
    hlo.resize(block_count_);
    hhi.resize(block_count_);
    vlo.resize(vertical_count_);
    vhi.resize(vertical_count_);
  }
  const Bracket lh = horizontal_.evaluate(p, hlo, hhi);
  const Bracket lv = vertical_.evaluate(m, vlo, vhi);
  const double Lh = lh.midpoint();
  const double Lv = lv.midpoint();
  auto ratio = [](double e, double l) {
    if (e <= 0.0 && l <= 0.0) return 0.0;
    if (!(l > 0.0)) throw Error("nonpositive Lyapunov midpoint with positive entropy");
    return e / l;
  };
  const double D = ratio(Hc, Lh) + ratio(Hv, Lv);
  if (!want) return D;

  for (std::size_t b = 0; b < block_count_; ++b) {
    const std::size_t v = vertical_of_block_[b];
    const double dH = p[b] > kNegligibleWeight ? -(std::log(p[b]) + 1.0) / q : 0.0;
    const double dHv = m[v] > kNegligibleWeight ? -(std::log(m[v]) + 1.0) / q : 0.0;
    const double gLh = 0.5 * (hlo[b] + hhi[b]);
    const double gLv = 0.5 * (vlo[v] + vhi[v]);
    double g = 0.0;
    if (Lh > 0.0) g += (dH - dHv) / Lh - Hc / (Lh * Lh) * gLh;
    if (Lv > 0.0) g += dHv / Lv - Hv / (Lv * Lv) * gLv;
    grad[b] = g;
  }
  return D;
}

DimensionObjective make_objective(const INCSystem& system, int level, const OptConfig& cfg) {
  const std::vector<Digit> support = system.digits();
  const int depth =
      affordable_depth(system, support, level, std::max(cfg.objective_depth, 1), cfg.objective_budget);
  return DimensionObjective(system, support, level, depth, cfg.objective_budget);
}

// --- constrained multi-start solver ------------------------------------------

namespace {

struct Row {
  std::vector<double> a;
  double b = 0.0;  // a.p - b == 0, or a.p - b <= 0
};

struct Problem {
  const DimensionObjective* objective = nullptr;
  std::vector<Row> eq;
  std::vector<Row> le;
  const OptConfig* cfg = nullptr;
};

double dot(std::span<const double> a, std::span<const double> b) {
  NeumaierSum s;
  for (std::size_t k = 0; k < a.size(); ++k) s.add(a[k] * b[k]);
  return s.value();
}

struct StartResult {
  std::vector<double> p;
  double value = -std::numeric_limits<double>::infinity();
  double kkt = std::numeric_limits<double>::infinity();
  double max_violation = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool feasible = false;
  bool converged = false;
  /// An earlier optimum taken as is, without a solve.
  bool unpolished = false;
};

bool is_feasible(const Problem& pr, std::span<const double> p, double* worst = nullptr) {
  double w = 0.0;
  bool ok = true;
  for (const Row& r : pr.eq) {
    const double h = std::fabs(dot(r.a, p) - r.b);
    w = std::max(w, h);
    ok = ok && h <= pr.cfg->equality_tolerance;
  }
  for (const Row& r : pr.le) {
    const double g = dot(r.a, p) - r.b;
    w = std::max(w, g);
    ok = ok && g <= 0.5 * pr.cfg->strict_slack;
  }
  if (worst != nullptr) *worst = w;
  return ok;
}

/// Augmented Lagrangian in the softmax coordinates of the active blocks.
class Lagrangian {
 public:
  Lagrangian(const Problem& pr, std::vector<std::size_t> active)
      : pr_(pr), active_(std::move(active)), full_(pr.objective->size(), 0.0),
        grad_full_(pr.objective->size(), 0.0), lambda_(pr.eq.size(), 0.0), mu_(pr.le.size(), 0.0) {}

  std::size_t size() const { return active_.size(); }
  double penalty = 10.0;
  std::vector<double>& lambda() { return lambda_; }
  std::vector<double>& mu() { return mu_; }

  std::span<const double> weights(std::span<const double> z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    NeumaierSum s;
    for (std::size_t k = 0; k < z.size(); ++k) s.add(std::exp(z[k] - zmax));
    const double total = s.value();
    std::fill(full_.begin(), full_.end(), 0.0);
    for (std::size_t k = 0; k < z.size(); ++k) full_[active_[k]] = std::exp(z[k] - zmax) / total;
    return full_;
  }

  /// Returns the value and fills the z-gradient; `dvalue` receives D.
  double evaluate(std::span<const double> z, std::span<double> gz, double* dvalue = nullptr) {
    const std::span<const double> p = weights(z);
    const double D = pr_.objective->value_and_gradient(p, grad_full_);
    if (dvalue != nullptr) *dvalue = D;
    double f = -D;
    std::vector<double> gp(active_.size());
    for (std::size_t k = 0; k < active_.size(); ++k) gp[k] = -grad_full_[active_[k]];
    for (std::size_t e = 0; e < pr_.eq.size(); ++e) {
      const Row& r = pr_.eq[e];
      const double h = dot(r.a, p) - r.b;
      f += lambda_[e] * h + 0.5 * penalty * h * h;
      const double c = lambda_[e] + penalty * h;
      for (std::size_t k = 0; k < active_.size(); ++k) gp[k] += c * r.a[active_[k]];
    }
    for (std::size_t i = 0; i < pr_.le.size(); ++i) {
      const Row& r = pr_.le[i];
      const double g = dot(r.a, p) - r.b;
      const double t = mu_[i] + penalty * g;
      if (t > 0.0) {
        f += (t * t - mu_[i] * mu_[i]) / (2.0 * penalty);
        for (std::size_t k = 0; k < active_.size(); ++k) gp[k] += t * r.a[active_[k]];
      } else {
        f -= mu_[i] * mu_[i] / (2.0 * penalty);
      }
    }
    double mean = 0.0;
    for (std::size_t k = 0; k < active_.size(); ++k) mean += p[active_[k]] * gp[k];
    for (std::size_t k = 0; k < active_.size(); ++k) gz[k] = p[active_[k]] * (gp[k] - mean);
    return f;
  }

  void update_multipliers(std::span<const double> p) {
    for (std::size_t e = 0; e < pr_.eq.size(); ++e) {
      lambda_[e] += penalty * (dot(pr_.eq[e].a, p) - pr_.eq[e].b);
    }
    for (std::size_t i = 0; i < pr_.le.size(); ++i) {
      mu_[i] = std::max(0.0, mu_[i] + penalty * (dot(pr_.le[i].a, p) - pr_.le[i].b));
    }
  }

  double complementarity(std::span<const double> p) const {
    double c = 0.0;
    for (std::size_t i = 0; i < pr_.le.size(); ++i) {
      c = std::max(c, std::fabs(mu_[i] * (dot(pr_.le[i].a, p) - pr_.le[i].b)));
    }
    return c;
  }

  const std::vector<std::size_t>& active() const { return active_; }

 private:
  const Problem& pr_;
  std::vector<std::size_t> active_;
  std::vector<double> full_;
  std::vector<double> grad_full_;
  std::vector<double> lambda_;
  std::vector<double> mu_;
};

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

struct InnerResult {
  int iterations = 0;
  double grad_norm = 0.0;
};

/// Limited-memory BFGS with Armijo backtracking.
InnerResult lbfgs(Lagrangian& L, std::vector<double>& z, int max_iter, double gtol) {
  const std::size_t n = z.size();
  const int memory = 8;
  std::vector<std::vector<double>> S;
  std::vector<std::vector<double>> Y;
  std::vector<double> rho;
  std::vector<double> g(n);
  std::vector<double> gn(n);
  std::vector<double> d(n);
  std::vector<double> zn(n);
  double f = L.evaluate(z, g);
  InnerResult out;
  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    const double gnorm = inf_norm(g);
    if (gnorm <= gtol) break;

    // Two-loop recursion.
    d = g;
    std::vector<double> alpha(S.size());
    for (std::size_t k = S.size(); k-- > 0;) {
      alpha[k] = rho[k] * dot(S[k], d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * Y[k][i];
    }
    if (!S.empty()) {
      const double gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
      for (double& x : d) x *= gamma;
    }
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta = rho[k] * dot(Y[k], d);
      for (std::size_t i = 0; i < n; ++i) d[i] += S[k][i] * (alpha[k] - beta);
    }
    for (double& x : d) x = -x;
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = dot(g, d);
    }
    double t = 1.0;
    if (S.empty()) t = std::min(1.0, 1.0 / std::max(inf_norm(d), 1e-300));
    // Keep each step inside a trust region in z.
    const double dmax = inf_norm(d);
    if (t * dmax > 20.0) t = 20.0 / dmax;

    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) zn[i] = z[i] + t * d[i];
      fn = L.evaluate(zn, gn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!S.empty()) {
        S.clear();
        Y.clear();
        rho.clear();
        continue;
      }
      break;
    }
    std::vector<double> s(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = zn[i] - z[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-16 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (static_cast<int>(S.size()) == memory) {
        S.erase(S.begin());
        Y.erase(Y.begin());
        rho.erase(rho.begin());
      }
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
    }
    stall = (f - fn <= 1e-16 * std::max(1.0, std::fabs(f))) ? stall + 1 : 0;
    z.swap(zn);
    g.swap(gn);
    f = fn;
    if (stall >= 10) break;
  }
  out.grad_norm = inf_norm(g);
  return out;
}

StartResult solve_on(const Problem& pr, const std::vector<std::size_t>& active,
                     std::span<const double> p0_full) {
  const OptConfig& cfg = *pr.cfg;
  StartResult res;
  std::vector<double> p(pr.objective->size(), 0.0);
  if (active.size() == 1) {
    p[active[0]] = 1.0;
    res.p = p;
    res.value = pr.objective->value(p);
    res.kkt = 0.0;
    res.feasible = is_feasible(pr, p, &res.max_violation);
    res.converged = res.feasible;
    return res;
  }
  Lagrangian L(pr, active);
  L.penalty = cfg.initial_penalty;
  std::vector<double> z(active.size());
  for (std::size_t k = 0; k < active.size(); ++k) {
    z[k] = std::log(std::max(p0_full[active[k]], 1e-300));
  }
  const bool constrained = !pr.eq.empty() || !pr.le.empty();
  const int rounds = constrained ? std::max(1, cfg.max_outer_rounds) : 1;
  std::vector<double> gz(active.size());
  for (int round = 0; round < rounds; ++round) {
    const InnerResult inner = lbfgs(L, z, cfg.max_inner_iterations, cfg.gradient_tolerance);
    res.iterations += inner.iterations;
    const std::span<const double> pw = L.weights(z);
    p.assign(pw.begin(), pw.end());
    if (!constrained) {
      res.kkt = inner.grad_norm;
      break;
    }
    L.update_multipliers(p);
    // Stationarity of the Lagrangian at the updated multipliers.
    const double old_penalty = L.penalty;
    L.penalty = 0.0;
    L.evaluate(z, gz);
    L.penalty = old_penalty;
    res.kkt = std::max(inf_norm(gz), L.complementarity(p));
    if (is_feasible(pr, p) && res.kkt <= 1e-6) break;
    L.penalty *= cfg.penalty_growth;
  }
  res.p = p;
  res.value = pr.objective->value(p);
  res.feasible = is_feasible(pr, p, &res.max_violation);
  res.converged = res.feasible && res.kkt <= 1e-6;
  return res;
}

/// Solve, then re-solve on the face of coordinates above the prune threshold.
StartResult solve_start(const Problem& pr, std::span<const double> p0) {
  std::vector<std::size_t> active;
  for (std::size_t b = 0; b < p0.size(); ++b) {
    if (p0[b] > 0.0) active.push_back(b);
  }
  StartResult best = solve_on(pr, active, p0);
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<std::size_t> face;
    NeumaierSum kept;
    for (std::size_t b : active) {
      if (best.p[b] >= pr.cfg->prune_threshold) {
        face.push_back(b);
        kept.add(best.p[b]);
      }
    }
    if (face.size() == active.size() || face.empty()) break;
    std::vector<double> start(best.p.size(), 0.0);
    for (std::size_t b : face) start[b] = best.p[b] / kept.value();
    StartResult pruned = solve_on(pr, face, start);
    pruned.iterations += best.iterations;
    const bool better = pruned.feasible && (!best.feasible || pruned.value >= best.value - 1e-6);
    if (!better) break;
    best = std::move(pruned);
    active = face;
  }
  return best;
}

std::vector<double> dirichlet_start(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> w(n);
  NeumaierSum s;
  for (double& x : w) {
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    x = -std::log(u);
    s.add(x);
  }
  for (double& x : w) x /= s.value();
  return w;
}

std::optional<std::vector<double>> map_warm_start(const BernoulliMeasure& warm,
                                                  const std::vector<Digit>& support, int level) {
  if (warm.level() != level) return std::nullopt;
  std::map<Digit, std::size_t> pos;
  for (std::size_t k = 0; k < support.size(); ++k) pos.emplace(support[k], k);
  const BlockLayout layout(support.size(), level);
  std::vector<double> w(layout.count, 0.0);
  for (std::size_t b = 0; b < warm.block_count(); ++b) {
    if (warm.weights()[b] == 0.0) continue;
    std::size_t idx = 0;
    for (Digit d : warm.block(b)) {
      auto it = pos.find(d);
      if (it == pos.end()) return std::nullopt;
      idx = idx * support.size() + it->second;
    }
    w[idx] += warm.weights()[b];
  }
  return w;
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<double> block_coefficients(const PotentialTable& phi, const BernoulliMeasure& layout_measure) {
  const int q = layout_measure.level();
  if (q % phi.level() != 0) {
    throw std::invalid_argument("potential level " + std::to_string(phi.level()) +
                                " does not divide the measure level " + std::to_string(q));
  }
  for (Digit d : layout_measure.support()) {
    if (!phi.covers(d)) {
      throw std::invalid_argument("potential does not cover digit " + to_string(d));
    }
  }
  std::vector<double> c(layout_measure.block_count());
  for (std::size_t b = 0; b < c.size(); ++b) c[b] = phi.aligned_sum(layout_measure.block(b)) / q;
  return c;
}

}  // namespace

OptResult maximize_dimension(const INCSystem& system, int level,
                             const std::vector<ConstraintSpec>& constraints, const OptConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!system.is_finite()) throw std::invalid_argument("maximize_dimension needs a finite truncation");
  if (level < 1) throw std::invalid_argument("level must be >= 1");
  if (cfg.starts < 1) throw std::invalid_argument("at least one start is required");
  const std::vector<Digit> support = system.digits();
  const BernoulliMeasure uniform = BernoulliMeasure::uniform(support, level);
  const std::size_t P = uniform.block_count();

  // Constraint rows, all linear in the block weights.
  Problem pr;
  pr.cfg = &cfg;
  std::vector<std::vector<double>> coefs;
  for (const ConstraintSpec& c : constraints) {
    if (!c.potential) throw std::invalid_argument("constraint without a potential");
    std::vector<double> a = block_coefficients(*c.potential, uniform);
    std::vector<double> neg(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) neg[k] = -a[k];
    const double s = cfg.strict_slack;
    std::visit(
        [&](const auto& kind) {
          using K = std::decay_t<decltype(kind)>;
          if constexpr (std::is_same_v<K, Equality>) {
            pr.eq.push_back({a, kind.alpha});
          } else if constexpr (std::is_same_v<K, Window>) {
            if (!(kind.m >= 1.0)) throw std::invalid_argument("window index m must be >= 1");
            pr.le.push_back({a, kind.alpha + 1.0 / kind.m - s});
            pr.le.push_back({neg, -(kind.alpha - 1.0 / kind.m) - s});
          } else if constexpr (std::is_same_v<K, LowerBound>) {
            pr.le.push_back({neg, -kind.m - s});
          } else {
            pr.le.push_back({a, -kind.m - s});
          }
        },
        c.kind);
    coefs.push_back(std::move(a));
  }

  if (!pr.eq.empty() || !pr.le.empty()) {
    LinearRows eq;
    LinearRows le;
    for (const Row& r : pr.eq) {
      eq.a.push_back(r.a);
      eq.b.push_back(r.b);
    }
    for (const Row& r : pr.le) {
      le.a.push_back(r.a);
      le.b.push_back(r.b);
    }
    const FeasibilityResult lp = simplex_feasibility(eq, le, P, 1e-10);
    if (!lp.feasible) {
      InfeasibilityCertificate cert;
      cert.violation = lp.violation;
      cert.multipliers = lp.multipliers;
      cert.summary = "least total violation " + fmt17(lp.violation) + " over " +
                     std::to_string(constraints.size()) + " constraint(s)";
      throw InfeasibleError(std::move(cert));
    }
  }

  const DimensionObjective objective = make_objective(system, level, cfg);
  pr.objective = &objective;

  // Starts: uniform, seeded Dirichlet(1) draws, and the warm start if any.
  std::vector<std::vector<double>> starts;
  starts.emplace_back(uniform.weights().begin(), uniform.weights().end());
  for (int s = 1; s < cfg.starts; ++s) {
    starts.push_back(dirichlet_start(P, cfg.seed + static_cast<std::uint64_t>(s)));
  }
  std::vector<std::vector<double>> warm;
  for (const BernoulliMeasure& w : cfg.warm_starts) {
    if (auto mapped = map_warm_start(w, support, level)) warm.push_back(std::move(*mapped));
  }
  for (const std::vector<double>& w : warm) {
    std::vector<double> start = w;
    for (double& x : start) x = (1.0 - 1e-6) * x + 1e-6 / static_cast<double>(P);
    starts.push_back(std::move(start));
    // Also polish on the earlier optimum's own face.
    starts.push_back(w);
  }

  std::vector<StartResult> results(starts.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(starts.size(), cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(starts.size());
  auto work = [&] {
    for (std::size_t k = next++; k < starts.size(); k = next++) {
      try {
        results[k] = solve_start(pr, starts[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (const std::vector<double>& w : warm) {
    // The earlier optimum itself, unmodified.
    StartResult cand;
    cand.p = w;
    cand.value = objective.value(cand.p);
    cand.feasible = is_feasible(pr, cand.p, &cand.max_violation);
    cand.kkt = std::numeric_limits<double>::infinity();
    cand.unpolished = true;
    results.push_back(std::move(cand));
  }

  const StartResult* best = nullptr;
  for (const StartResult& r : results) {
    if (best == nullptr) {
      best = &r;
      continue;
    }
    if (r.feasible != best->feasible) {
      if (r.feasible) best = &r;
      continue;
    }
    if (!r.feasible) {
      if (r.max_violation < best->max_violation) best = &r;
      continue;
    }
    // A solved point is preferred unless the unsolved one is clearly better.
    const double rv = r.unpolished ? r.value - 1e-9 : r.value;
    const double bv = best->unpolished ? best->value - 1e-9 : best->value;
    const double tie = 1e-12 * std::max(1.0, std::fabs(bv));
    if (rv > bv + tie || (rv >= bv - tie && lex_less(r.p, best->p))) {
      best = &r;
    }
  }

  OptResult out;
  out.support = support;
  out.level = level;
  out.weights = best->p;
  NeumaierSum total;
  for (double x : out.weights) total.add(x);
  for (double& x : out.weights) x /= total.value();
  out.objective = best->value;
  out.objective_depth = objective.depth();
  out.kkt_residual = best->kkt;
  out.iterations = best->iterations;
  out.starts_used = static_cast<int>(starts.size());
  out.feasible = best->feasible;
  bool any_converged = false;
  for (const StartResult& r : results) any_converged = any_converged || r.converged;
  out.converged = best->feasible && (best->converged || any_converged);

  const BernoulliMeasure mu = out.measure();
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const double c = dot(coefs[k], out.weights);
    out.integrals.push_back(c);
    std::visit(
        [&](const auto& kind) {
          using K = std::decay_t<decltype(kind)>;
          if constexpr (std::is_same_v<K, Equality>) {
            out.residuals.push_back(std::fabs(c - kind.alpha));
          } else if constexpr (std::is_same_v<K, Window>) {
            out.residuals.push_back(std::fabs(c - kind.alpha) - 1.0 / kind.m);
          } else if constexpr (std::is_same_v<K, LowerBound>) {
            out.residuals.push_back(kind.m - c);
          } else {
            out.residuals.push_back(c + kind.m);
          }
        },
        constraints[k].kind);
  }

  const int bracket_depth = affordable_depth(system, support, level, 2 * objective.depth(),
                                             std::max(cfg.bracket_budget, cfg.objective_budget));
  const EntropyStats h = entropy_stats(mu);
  const Bracket lh = lyapunov(system, mu, Axis::horizontal, bracket_depth,
                              std::max(cfg.bracket_budget, cfg.objective_budget));
  const Bracket lv = lyapunov(system, mu, Axis::vertical, bracket_depth,
                              std::max(cfg.bracket_budget, cfg.objective_budget));
  try {
    out.dimension = dimension_bracket(h, lh, lv);
  } catch (const Error&) {
    // Zero lower exponent: the upper bound on D is unbounded.
    out.dimension = dimension_bracket(h, {lh.upper, lh.upper, lh.depth}, {lv.upper, lv.upper, lv.depth});
    out.dimension.upper = std::numeric_limits<double>::infinity();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

double mcmullen_closed_form(int m, int n, std::span<const int> row_counts) {
  if (m < 2 || n < m) throw std::invalid_argument("need m >= 2 and n >= m");
  if (static_cast<int>(row_counts.size()) > m) throw std::invalid_argument("more rows than m");
  const double theta = std::log(static_cast<double>(m)) / std::log(static_cast<double>(n));
  double s = 0.0;
  for (int t : row_counts) {
    if (t < 0 || t > n) throw std::invalid_argument("row counts must lie in [0, n]");
    if (t > 0) s += std::pow(static_cast<double>(t), theta);
  }
  if (s == 0.0) throw std::invalid_argument("all rows are empty");
  return std::log(s) / std::log(static_cast<double>(m));
}

SweepResult truncation_sweep(const INCSystem& system, const std::vector<DigitTruncation>& schedule,
                             int level, const std::vector<ConstraintSpec>& constraints,
                             const OptConfig& cfg) {
  SweepResult out;
  OptConfig stage_cfg = cfg;
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    if (s > 0) {
      const std::vector<Digit> prev = schedule[s - 1].digits();
      const std::vector<Digit> cur = schedule[s].digits();
      if (!(cur.size() > prev.size() && std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()))) {
        throw std::invalid_argument("truncation schedule must be strictly increasing");
      }
    }
    const INCSystem stage = truncate(system, schedule[s]);
    OptResult r = maximize_dimension(stage, level, constraints, stage_cfg);
    if (!out.stages.empty()) {
      const OptResult& p = out.stages.back();
      const double tol = std::max(p.dimension.width(), r.dimension.width()) + 1e-9;
      if (r.dimension.midpoint() < p.dimension.midpoint() - tol) out.nondecreasing = false;
    }
    stage_cfg.warm_starts = cfg.warm_starts;
    stage_cfg.warm_starts.push_back(r.measure());
    out.sizes.push_back(schedule[s].size());
    out.stages.push_back(std::move(r));
  }
  return out;
}

}  // namespace incdim
