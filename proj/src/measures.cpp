#include "incdim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "incdim/numeric.hpp"

namespace incdim {

// --- layout ------------------------------------------------------------------

BlockLayout::BlockLayout(std::size_t alphabet_size, int q, std::size_t budget)
    : alphabet(alphabet_size), level(q) {
  if (alphabet_size == 0) throw std::invalid_argument("empty alphabet");
  if (q < 1) throw std::invalid_argument("level must be >= 1");
  const double n = std::pow(static_cast<double>(alphabet_size), q);
  if (n > static_cast<double>(budget)) {
    throw BudgetError("block table of " + fmt17(n) + " entries exceeds the budget of " +
                      std::to_string(budget));
  }
  count = 1;
  for (int k = 0; k < q; ++k) count *= alphabet_size;
}

void BlockLayout::decode(std::size_t index, std::span<std::size_t> out) const {
  for (int k = level; k-- > 0;) {
    out[static_cast<std::size_t>(k)] = index % alphabet;
    index /= alphabet;
  }
}

// --- Bernoulli measures ------------------------------------------------------

BernoulliMeasure::BernoulliMeasure(std::vector<Digit> support, int level, std::vector<double> weights)
    : support_(std::move(support)) {
  if (support_.empty()) throw std::invalid_argument("measure support is empty");
  std::set<Digit> seen(support_.begin(), support_.end());
  if (seen.size() != support_.size()) throw std::invalid_argument("measure support repeats a digit");
  layout_ = BlockLayout(support_.size(), level);
  if (weights.size() != layout_.count) {
    throw std::invalid_argument("expected " + std::to_string(layout_.count) + " block weights, got " +
                                std::to_string(weights.size()));
  }
  NeumaierSum total;
  for (double& w : weights) {
    if (!std::isfinite(w) || w < -kContainmentSlack) {
      throw std::invalid_argument("block weights must be finite and nonnegative");
    }
    if (w < kNegligibleWeight) w = 0.0;
    total.add(w);
  }
  if (std::fabs(total.value() - 1.0) > kContainmentSlack) {
    throw std::invalid_argument("block weights sum to " + fmt17(total.value()) + ", not 1");
  }
  weights_ = std::move(weights);
}

BernoulliMeasure BernoulliMeasure::uniform(std::vector<Digit> support, int level) {
  const BlockLayout layout(support.size(), level);
  std::vector<double> w(layout.count, 1.0 / static_cast<double>(layout.count));
  return BernoulliMeasure(std::move(support), level, std::move(w));
}

BernoulliMeasure BernoulliMeasure::point_mass(Digit d) { return BernoulliMeasure({d}, 1, {1.0}); }

std::vector<Digit> BernoulliMeasure::block(std::size_t index) const {
  std::vector<std::size_t> pos(static_cast<std::size_t>(level()));
  layout_.decode(index, pos);
  std::vector<Digit> out;
  out.reserve(pos.size());
  for (std::size_t p : pos) out.push_back(support_[p]);
  return out;
}

std::vector<int> BernoulliMeasure::vertical_alphabet() const {
  std::set<int> rows;
  for (Digit d : support_) rows.insert(d.row);
  return {rows.begin(), rows.end()};
}

std::vector<std::size_t> BernoulliMeasure::vertical_unit_of_block() const {
  const std::vector<int> alphabet = vertical_alphabet();
  std::vector<std::size_t> row_pos(support_.size());
  for (std::size_t k = 0; k < support_.size(); ++k) {
    row_pos[k] = static_cast<std::size_t>(
        std::lower_bound(alphabet.begin(), alphabet.end(), support_[k].row) - alphabet.begin());
  }
  std::vector<std::size_t> out(weights_.size());
  std::vector<std::size_t> pos(static_cast<std::size_t>(level()));
  for (std::size_t b = 0; b < weights_.size(); ++b) {
    layout_.decode(b, pos);
    std::size_t v = 0;
    for (std::size_t p : pos) v = v * alphabet.size() + row_pos[p];
    out[b] = v;
  }
  return out;
}

std::vector<double> BernoulliMeasure::vertical_marginal() const {
  const std::size_t a = vertical_alphabet().size();
  std::size_t count = 1;
  for (int k = 0; k < level(); ++k) count *= a;
  std::vector<double> m(count, 0.0);
  const std::vector<std::size_t> unit = vertical_unit_of_block();
  for (std::size_t b = 0; b < weights_.size(); ++b) m[unit[b]] += weights_[b];
  return m;
}

EntropyStats entropy_stats(const BernoulliMeasure& mu) {
  const double q = mu.level();
  NeumaierSum ht;
  for (double p : mu.weights()) ht.add(-xlogx(p));
  NeumaierSum hv;
  for (double m : mu.vertical_marginal()) hv.add(-xlogx(m));
  EntropyStats s;
  s.total = ht.value() / q;
  s.vertical = hv.value() / q;
  s.conditional = s.total - s.vertical;
  return s;
}

// --- cylinder model ----------------------------------------------------------

namespace {

struct AxisAlphabet {
  std::vector<Branch> branches;
  bool affine = true;
};

AxisAlphabet axis_alphabet(const INCSystem& system, std::span<const Digit> support, Axis axis) {
  AxisAlphabet out;
  if (axis == Axis::horizontal) {
    for (Digit d : support) {
      if (!system.contains(d)) {
        throw std::invalid_argument("digit " + to_string(d) + " is not in the system");
      }
      out.branches.push_back(system.horizontal_branch(d));
    }
  } else {
    std::set<int> rows;
    for (Digit d : support) rows.insert(d.row);
    for (int i : rows) out.branches.push_back(system.vertical_branch(i));
  }
  out.affine = std::all_of(out.branches.begin(), out.branches.end(),
                           [](const Branch& b) { return is_affine(b); });
  return out;
}

int round_up(int depth, int level) { return ((depth + level - 1) / level) * level; }

}  // namespace

double CylinderModel::cylinder_count(std::size_t units, int level, int depth) {
  return std::pow(static_cast<double>(units), round_up(depth, level) / level);
}

CylinderModel::CylinderModel(const INCSystem& system, std::span<const Digit> support, int level,
                             Axis axis, int depth, std::size_t budget)
    : axis_(axis), level_(level) {
  if (depth < 1) throw std::invalid_argument("cylinder depth must be >= 1");
  if (level < 1) throw std::invalid_argument("level must be >= 1");
  const AxisAlphabet alpha = axis_alphabet(system, support, axis);
  const BlockLayout units(alpha.branches.size(), level, kDefaultBlockBudget);
  units_ = units.count;
  depth_ = round_up(depth, level);
  additive_ = alpha.affine;
  std::vector<std::size_t> pos(static_cast<std::size_t>(level));

  if (additive_) {
    arity_ = 1;
    lo_.assign(units_, 0.0);
    for (std::size_t u = 0; u < units_; ++u) {
      units.decode(u, pos);
      NeumaierSum s;
      for (std::size_t p : pos) s.add(-std::log(deriv_range(alpha.branches[p]).sup_abs));
      lo_[u] = s.value();
    }
    hi_ = lo_;
    return;
  }

  arity_ = depth_ / level;
  const double n = cylinder_count(units_, level, depth_);
  if (n > static_cast<double>(budget)) {
    throw BudgetError("depth-" + std::to_string(depth_) + " cylinder enumeration needs " + fmt17(n) +
                      " cylinders (budget " + std::to_string(budget) +
                      "); use a lower depth or importance sampling");
  }
  const std::size_t count = static_cast<std::size_t>(n);
  lo_.resize(count);
  hi_.resize(count);
  std::vector<const Branch*> word(static_cast<std::size_t>(depth_));
  std::vector<std::size_t> tuple(static_cast<std::size_t>(arity_));
  for (std::size_t t = 0; t < count; ++t) {
    std::size_t rest = t;
    for (int i = arity_; i-- > 0;) {
      tuple[static_cast<std::size_t>(i)] = rest % units_;
      rest /= units_;
    }
    for (int i = 0; i < arity_; ++i) {
      units.decode(tuple[static_cast<std::size_t>(i)], pos);
      for (int k = 0; k < level; ++k) {
        word[static_cast<std::size_t>(i * level + k)] = &alpha.branches[pos[static_cast<std::size_t>(k)]];
      }
    }
    const LogDerivRange r = composed_log_deriv_range(word);
    lo_[t] = -r.log_sup;
    hi_[t] = -r.log_inf;
  }
}

Bracket CylinderModel::evaluate(std::span<const double> w) const {
  return evaluate(w, {}, {});
}

Bracket CylinderModel::evaluate(std::span<const double> w, std::span<double> glo,
                                std::span<double> ghi) const {
  if (w.size() != units_) throw std::invalid_argument("unit weight vector has the wrong size");
  const bool grad = !glo.empty();
  if (grad) {
    std::fill(glo.begin(), glo.end(), 0.0);
    std::fill(ghi.begin(), ghi.end(), 0.0);
  }
  const double scale = 1.0 / depth_;
  const double per_unit = 1.0 / level_;

  if (additive_) {
    NeumaierSum s;
    for (std::size_t u = 0; u < units_; ++u) {
      s.add(w[u] * lo_[u]);
      if (grad) glo[u] = ghi[u] = lo_[u] * per_unit;
    }
    const double v = s.value() * per_unit;
    return {v, v, depth_};
  }

  NeumaierSum slo;
  NeumaierSum shi;
  if (arity_ == 1) {
    for (std::size_t u = 0; u < units_; ++u) {
      slo.add(w[u] * lo_[u]);
      shi.add(w[u] * hi_[u]);
      if (grad) {
        glo[u] = lo_[u] * scale;
        ghi[u] = hi_[u] * scale;
      }
    }
  } else if (arity_ == 2) {
    std::size_t t = 0;
    for (std::size_t u = 0; u < units_; ++u) {
      double row_lo = 0.0;
      double row_hi = 0.0;
      for (std::size_t v = 0; v < units_; ++v, ++t) {
        row_lo += w[v] * lo_[t];
        row_hi += w[v] * hi_[t];
        if (grad) {
          glo[v] += w[u] * lo_[t] * scale;
          ghi[v] += w[u] * hi_[t] * scale;
        }
      }
      slo.add(w[u] * row_lo);
      shi.add(w[u] * row_hi);
      if (grad) {
        glo[u] += row_lo * scale;
        ghi[u] += row_hi * scale;
      }
    }
  } else {
    const std::size_t k = static_cast<std::size_t>(arity_);
    std::vector<std::size_t> tuple(k, 0);
    std::vector<double> prefix(k + 1, 1.0);
    std::vector<double> suffix(k + 1, 1.0);
    for (std::size_t i = 0; i < k; ++i) prefix[i + 1] = prefix[i] * w[0];
    for (std::size_t t = 0; t < lo_.size(); ++t) {
      const double prod = prefix[k];
      slo.add(prod * lo_[t]);
      shi.add(prod * hi_[t]);
      if (grad) {
        suffix[k] = 1.0;
        for (std::size_t i = k; i-- > 0;) suffix[i] = suffix[i + 1] * w[tuple[i]];
        for (std::size_t i = 0; i < k; ++i) {
          const double others = prefix[i] * suffix[i + 1];
          glo[tuple[i]] += others * lo_[t] * scale;
          ghi[tuple[i]] += others * hi_[t] * scale;
        }
      }
      std::size_t p = k;
      while (p-- > 0) {
        if (++tuple[p] < units_) break;
        tuple[p] = 0;
      }
      if (p == static_cast<std::size_t>(-1)) break;
      for (std::size_t i = p; i < k; ++i) prefix[i + 1] = prefix[i] * w[tuple[i]];
    }
  }
  return {slo.value() * scale, shi.value() * scale, depth_};
}

int affordable_depth(const INCSystem& system, std::span<const Digit> support, int level, int wanted,
                     std::size_t budget) {
  int depth = round_up(std::max(wanted, level), level);
  for (Axis axis : {Axis::horizontal, Axis::vertical}) {
    const AxisAlphabet alpha = axis_alphabet(system, support, axis);
    if (alpha.affine) continue;
    const auto units =
        static_cast<std::size_t>(std::pow(static_cast<double>(alpha.branches.size()), level));
    while (depth > level &&
           CylinderModel::cylinder_count(units, level, depth) > static_cast<double>(budget)) {
      depth -= level;
    }
  }
  return depth;
}

LyapunovBracket lyapunov(const INCSystem& system, const BernoulliMeasure& mu, Axis axis, int depth,
                         std::size_t budget) {
  const CylinderModel model(system, mu.support(), mu.level(), axis, depth, budget);
  if (axis == Axis::horizontal) return model.evaluate(mu.weights());
  const std::vector<double> marginal = mu.vertical_marginal();
  return model.evaluate(marginal);
}

Bracket dimension_bracket(const EntropyStats& h, const Bracket& lambda_h, const Bracket& lambda_v) {
  auto term = [](double entropy, const Bracket& lam, const char* axis) -> std::pair<double, double> {
    if (entropy <= 1e-14) return {0.0, 0.0};
    if (!(lam.lower > 0.0)) {
      throw Error(std::string("nonpositive ") + axis +
                  " Lyapunov lower bracket with positive entropy; exclude dominance violations "
                  "or raise the depth");
    }
    return {entropy / lam.upper, entropy / lam.lower};
  };
  const auto [hl, hu] = term(h.conditional, lambda_h, "horizontal");
  const auto [vl, vu] = term(h.vertical, lambda_v, "vertical");
  return {hl + vl, hu + vu, std::min(lambda_h.depth, lambda_v.depth)};
}

Bracket dimension(const INCSystem& system, const BernoulliMeasure& mu, int depth, std::size_t budget) {
  const EntropyStats h = entropy_stats(mu);
  const LyapunovBracket lh = lyapunov(system, mu, Axis::horizontal, depth, budget);
  const LyapunovBracket lv = lyapunov(system, mu, Axis::vertical, depth, budget);
  return dimension_bracket(h, lh, lv);
}

// --- potentials --------------------------------------------------------------

PotentialTable::PotentialTable(int level, std::vector<Digit> support, std::vector<double> values,
                               BoundSide side, double bound)
    : support_(std::move(support)), values_(std::move(values)), side_(side), bound_(bound) {
  layout_ = BlockLayout(support_.size(), level);
  if (values_.size() != layout_.count) {
    throw std::invalid_argument("potential table has " + std::to_string(values_.size()) +
                                " values for " + std::to_string(layout_.count) + " blocks");
  }
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (!index_.emplace(support_[k], k).second) {
      throw std::invalid_argument("potential support repeats a digit");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("potential values must be finite");
    if ((side_ == BoundSide::below && v < bound_) || (side_ == BoundSide::above && v > bound_)) {
      throw std::invalid_argument("potential table violates its declared one-sided bound");
    }
  }
}

PotentialTable PotentialTable::tabulate(const Potential& phi, std::span<const Digit> support) {
  if (!phi.value) throw std::invalid_argument("potential has no value function");
  const BlockLayout layout(support.size(), phi.level);
  std::vector<double> values(layout.count);
  std::vector<std::size_t> pos(static_cast<std::size_t>(phi.level));
  std::vector<Digit> block(pos.size());
  for (std::size_t b = 0; b < layout.count; ++b) {
    layout.decode(b, pos);
    for (std::size_t k = 0; k < pos.size(); ++k) block[k] = support[pos[k]];
    values[b] = phi.value(block);
  }
  return PotentialTable(phi.level, {support.begin(), support.end()}, std::move(values), phi.side,
                        phi.bound);
}

double PotentialTable::block_value(std::span<const Digit> block) const {
  if (static_cast<int>(block.size()) != level()) {
    throw std::invalid_argument("block length differs from the potential level");
  }
  std::size_t idx = 0;
  for (Digit d : block) {
    auto it = index_.find(d);
    if (it == index_.end()) {
      throw std::invalid_argument("digit " + to_string(d) + " outside the potential's support");
    }
    idx = idx * layout_.alphabet + it->second;
  }
  return values_[idx];
}

double PotentialTable::aligned_sum(std::span<const Digit> word) const {
  const std::size_t r = static_cast<std::size_t>(level());
  if (word.size() % r != 0) throw std::invalid_argument("word length is not a multiple of the level");
  double s = 0.0;
  for (std::size_t k = 0; k < word.size(); k += r) s += block_value(word.subspan(k, r));
  return s;
}

double PotentialTable::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double PotentialTable::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

double integrate(const BernoulliMeasure& mu, const PotentialTable& phi) {
  if (mu.level() % phi.level() != 0) {
    return integrate(lift_to_level(mu, std::lcm(mu.level(), phi.level())), phi);
  }
  NeumaierSum s;
  for (std::size_t b = 0; b < mu.block_count(); ++b) {
    const double p = mu.weights()[b];
    if (p == 0.0) continue;
    s.add(p * phi.aligned_sum(mu.block(b)));
  }
  return s.value() / mu.level();
}

BernoulliMeasure lift_to_level(const BernoulliMeasure& mu, int q, std::size_t max_blocks) {
  if (q < 1 || q % mu.level() != 0) {
    throw std::invalid_argument("lift level must be a positive multiple of the measure level");
  }
  const int r = mu.level();
  const BlockLayout layout(mu.support().size(), q, max_blocks);
  std::vector<double> w(layout.count);
  std::vector<std::size_t> pos(static_cast<std::size_t>(q));
  const std::size_t K = mu.support().size();
  for (std::size_t b = 0; b < layout.count; ++b) {
    layout.decode(b, pos);
    double prod = 1.0;
    for (int c = 0; c < q; c += r) {
      std::size_t idx = 0;
      for (int k = 0; k < r; ++k) idx = idx * K + pos[static_cast<std::size_t>(c + k)];
      prod *= mu.weights()[idx];
    }
    w[b] = prod;
  }
  // Renormalise away rounding so the block sum stays within tolerance.
  NeumaierSum s;
  for (double x : w) s.add(x);
  for (double& x : w) x /= s.value();
  return BernoulliMeasure({mu.support().begin(), mu.support().end()}, q, std::move(w));
}

double vertical_dim(std::span<const double> p, std::span<const double> b) {
  if (p.size() != b.size() || p.empty()) throw std::invalid_argument("vertical_dim: size mismatch");
  NeumaierSum num;
  NeumaierSum den;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(b[i] > 0.0 && b[i] < 1.0)) {
      throw std::invalid_argument("vertical_dim: contraction b_i must lie in (0,1)");
    }
    num.add(xlogx(p[i]));
    den.add(p[i] * std::log(b[i]));
  }
  if (num.value() == 0.0) return 0.0;
  return num.value() / den.value();
}

namespace potentials {

Potential row_indicator(int row) {
  return {"row_indicator(" + std::to_string(row) + ")", 1,
          [row](std::span<const Digit> b) { return b[0].row == row ? 1.0 : 0.0; }, BoundSide::below,
          0.0};
}

Potential digit_value() {
  return {"digit_value", 1, [](std::span<const Digit> b) { return static_cast<double>(b[0].index); },
          BoundSide::below, 0.0};
}

Potential log_digit() {
  return {"log_digit", 1,
          [](std::span<const Digit> b) {
            if (b[0].index < 1) throw std::invalid_argument("log_digit needs labels >= 1");
            return std::log(static_cast<double>(b[0].index));
          },
          BoundSide::below, 0.0};
}

Potential vertical_digit() {
  return {"vertical_digit", 1, [](std::span<const Digit> b) { return static_cast<double>(b[0].row); },
          BoundSide::below, 0.0};
}

Potential digit_indicator(long k) {
  return {"digit_indicator(" + std::to_string(k) + ")", 1,
          [k](std::span<const Digit> b) { return b[0].index == k ? 1.0 : 0.0; }, BoundSide::below,
          0.0};
}

}  // namespace potentials

}  // namespace incdim
