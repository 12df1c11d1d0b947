#include "incdim/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace incdim {

std::vector<ConstraintSpec> stage_constraints(const SpectrumRequest& req, int m) {
  if (req.potentials.empty()) throw std::invalid_argument("a level-set request needs a potential");
  if (req.targets.size() != req.potentials.size() && req.targets.size() != 1) {
    throw std::invalid_argument("targets must match the potentials or be a single value");
  }
  std::vector<ConstraintSpec> out;
  const std::size_t k_max = std::min<std::size_t>(static_cast<std::size_t>(std::max(m, 0)),
                                                  req.potentials.size());
  for (std::size_t k = 0; k < k_max; ++k) {
    const double alpha = req.targets.size() == 1 ? req.targets[0] : req.targets[k];
    ConstraintKind kind;
    if (alpha == std::numeric_limits<double>::infinity()) {
      kind = LowerBound{static_cast<double>(m)};
    } else if (alpha == -std::numeric_limits<double>::infinity()) {
      kind = UpperBound{static_cast<double>(m)};
    } else {
      kind = Window{alpha, static_cast<double>(m)};
    }
    out.push_back({req.potentials[k], kind});
  }
  return out;
}

namespace {

const DigitTruncation& stage_truncation(const SpectrumRequest& req, std::size_t s) {
  if (req.truncations.empty()) throw std::invalid_argument("a level-set request needs a truncation");
  return req.truncations.size() == 1 ? req.truncations[0] : req.truncations.at(s);
}

LevelSetStage run_stage(const SpectrumRequest& req, int m, const DigitTruncation& F,
                        const std::vector<BernoulliMeasure>& warm) {
  LevelSetStage st;
  st.m = m;
  st.trunc_size = F.size();
  const INCSystem sys = truncate(req.system, F);
  OptConfig cfg = req.cfg;
  cfg.warm_starts = warm;
  try {
    st.result = maximize_dimension(sys, req.level, stage_constraints(req, m), cfg);
    st.feasible = true;
  } catch (const InfeasibleError& e) {
    st.note = e.what();
  }
  return st;
}

}  // namespace

LevelSetReport level_set_dim(const SpectrumRequest& req) {
  if (req.m_schedule.empty()) throw std::invalid_argument("empty m schedule");
  if (req.truncations.size() != 1 && req.truncations.size() != req.m_schedule.size()) {
    throw std::invalid_argument("need one truncation per stage or a single shared truncation");
  }
  LevelSetReport rep;
  std::vector<BernoulliMeasure> warm;
  const LevelSetStage* prev = nullptr;
  const LevelSetStage* before = nullptr;
  for (std::size_t s = 0; s < req.m_schedule.size(); ++s) {
    if (s > 0 && req.m_schedule[s] <= req.m_schedule[s - 1]) {
      throw std::invalid_argument("m schedule must be increasing");
    }
    rep.stages.push_back(run_stage(req, req.m_schedule[s], stage_truncation(req, s), warm));
  }
  for (const LevelSetStage& st : rep.stages) {
    if (!st.feasible) continue;
    if (prev != nullptr && st.result->dimension.upper > prev->result->dimension.upper + 1e-6) {
      rep.nonincreasing = false;
    }
    before = prev;
    prev = &st;
  }
  rep.empty = prev == nullptr;
  if (prev != nullptr) {
    rep.limit = prev->result->dimension.upper;
    rep.richardson = rep.limit;
    if (before != nullptr) {
      const double v1 = before->result->dimension.upper;
      const double m1 = before->m;
      const double m2 = prev->m;
      rep.trend = rep.limit - v1;
      rep.richardson = (m2 * rep.limit - m1 * v1) / (m2 - m1);
    }
  }
  return rep;
}

LevelSetGrid level_set_grid(const SpectrumRequest& req) {
  if (req.m_schedule.empty() || req.truncations.empty()) {
    throw std::invalid_argument("grid needs m values and truncations");
  }
  LevelSetGrid g;
  g.m_values = req.m_schedule;
  for (const DigitTruncation& F : req.truncations) g.trunc_sizes.push_back(F.size());
  const std::size_t nm = g.m_values.size();
  const std::size_t nt = req.truncations.size();
  g.cells.assign(nm, std::vector<LevelSetStage>(nt));
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t i = nm; i-- > 0;) {
      std::vector<BernoulliMeasure> warm;
      // A finer-window optimum is feasible for a coarser window, and a smaller
      // truncation's optimum is feasible on a larger one.
      for (std::size_t k = i + 1; k < nm; ++k) {
        if (g.cells[k][j].feasible) {
          warm.push_back(g.cells[k][j].result->measure());
          break;
        }
      }
      if (j > 0 && g.cells[i][j - 1].feasible) warm.push_back(g.cells[i][j - 1].result->measure());
      g.cells[i][j] = run_stage(req, g.m_values[i], req.truncations[j], warm);
    }
  }
  return g;
}

std::vector<SpectrumRow> spectrum_curve(const INCSystem& system, std::shared_ptr<const PotentialTable> phi,
                                        const std::vector<double>& alphas, int level, const OptConfig& cfg) {
  if (!phi) throw std::invalid_argument("spectrum curve needs a potential");
  const std::vector<Digit> support = system.digits();
  const BernoulliMeasure blocks = BernoulliMeasure::uniform(support, phi->level());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t b = 0; b < blocks.block_count(); ++b) {
    const double v = phi->aligned_sum(blocks.block(b)) / phi->level();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double tol = 1e-12 * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)));
  std::vector<SpectrumRow> rows;
  OptConfig c = cfg;
  for (double alpha : alphas) {
    SpectrumRow row;
    row.alpha = alpha;
    row.endpoint = std::fabs(alpha - lo) <= tol || std::fabs(alpha - hi) <= tol;
    if (alpha >= lo - tol && alpha <= hi + tol) {
      try {
        row.result = maximize_dimension(system, level, {{phi, Equality{alpha}}}, c);
        row.feasible = true;
        c.warm_starts = cfg.warm_starts;
        c.warm_starts.push_back(row.result->measure());
      } catch (const InfeasibleError&) {
        row.feasible = false;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace incdim
