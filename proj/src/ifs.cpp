#include "incdim/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "incdim/numeric.hpp"

namespace incdim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_in_unit(Interval in) {
  if (!(in.lo <= in.hi) || in.lo < -kContainmentSlack || in.hi > 1.0 + kContainmentSlack) {
    throw std::invalid_argument("interval [" + fmt17(in.lo) + ", " + fmt17(in.hi) +
                                "] is not a closed subinterval of [0,1]");
  }
}

}  // namespace

double apply(const Branch& f, double x) {
  return std::visit(Overloaded{
                        [x](const Affine& g) {
                          return g.reversed ? g.offset - g.ratio * x : g.offset + g.ratio * x;
                        },
                        [x](const GaussBranch& g) { return 1.0 / (static_cast<double>(g.a) + x); },
                        [x](const BinaryBranch& g) { return (x + g.b) / g.base; },
                    },
                    f);
}

double derivative(const Branch& f, double x) {
  return std::visit(Overloaded{
                        [](const Affine& g) { return g.reversed ? -g.ratio : g.ratio; },
                        [x](const GaussBranch& g) {
                          const double d = static_cast<double>(g.a) + x;
                          return -1.0 / (d * d);
                        },
                        [](const BinaryBranch& g) { return 1.0 / g.base; },
                    },
                    f);
}

Interval image(const Branch& f, Interval in) {
  const double u = incdim::apply(f, in.lo);
  const double v = incdim::apply(f, in.hi);
  return u <= v ? Interval{u, v} : Interval{v, u};
}

bool is_affine(const Branch& f) noexcept { return !std::holds_alternative<GaussBranch>(f); }

std::string describe(const Branch& f) {
  return std::visit(Overloaded{
                        [](const Affine& g) {
                          return "affine(" + fmt17(g.ratio) + "," + fmt17(g.offset) +
                                 (g.reversed ? ",rev)" : ")");
                        },
                        [](const GaussBranch& g) { return "gauss(" + std::to_string(g.a) + ")"; },
                        [](const BinaryBranch& g) {
                          return "binary(" + std::to_string(g.b) + "/" + std::to_string(g.base) + ")";
                        },
                    },
                    f);
}

DerivRange deriv_range(const Branch& f, Interval in) {
  require_in_unit(in);
  // |f'| is constant or monotone for every branch kind: endpoints suffice.
  const double u = std::fabs(derivative(f, in.lo));
  const double v = std::fabs(derivative(f, in.hi));
  return {std::min(u, v), std::max(u, v)};
}

LogDerivRange composed_log_deriv_range(std::span<const Branch* const> word) {
  double ends[2];
  for (int e = 0; e < 2; ++e) {
    double x = e;
    NeumaierSum s;
    for (std::size_t k = word.size(); k-- > 0;) {
      s.add(std::log(std::fabs(derivative(*word[k], x))));
      x = incdim::apply(*word[k], x);
    }
    ends[e] = s.value();
  }
  return {std::min(ends[0], ends[1]), std::max(ends[0], ends[1])};
}

Interval composed_image(std::span<const Branch* const> word, Interval in) {
  for (std::size_t k = word.size(); k-- > 0;) in = image(*word[k], in);
  return in;
}

// --- IntervalIFS -------------------------------------------------------------

IntervalIFS IntervalIFS::finite(std::vector<long> labels, std::vector<Branch> branches,
                                double contraction_ratio, DistortionSequence rho) {
  if (labels.size() != branches.size()) {
    throw std::invalid_argument("label and branch lists differ in length");
  }
  if (!(contraction_ratio > 0.0 && contraction_ratio < 1.0)) {
    throw std::invalid_argument("contraction ratio must lie in (0,1)");
  }
  IntervalIFS ifs;
  ifs.finite_ = true;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (!ifs.table_.emplace(labels[k], branches[k]).second) {
      throw std::invalid_argument("duplicate branch label " + std::to_string(labels[k]));
    }
  }
  ifs.cap_ = ifs.table_.empty() ? 0 : ifs.table_.rbegin()->first;
  ifs.xi_ = contraction_ratio;
  ifs.rho_ = std::move(rho);
  return ifs;
}

IntervalIFS IntervalIFS::countable(Member member, long first_label, long enumeration_cap,
                                   double contraction_ratio, DistortionSequence rho) {
  if (!member) throw std::invalid_argument("countable family needs a membership function");
  if (!(contraction_ratio > 0.0 && contraction_ratio < 1.0)) {
    throw std::invalid_argument("contraction ratio must lie in (0,1)");
  }
  IntervalIFS ifs;
  ifs.finite_ = false;
  ifs.member_ = std::move(member);
  ifs.first_ = first_label;
  ifs.cap_ = enumeration_cap;
  ifs.xi_ = contraction_ratio;
  ifs.rho_ = std::move(rho);
  return ifs;
}

std::vector<long> IntervalIFS::labels(long cap) const {
  std::vector<long> out;
  if (finite_) {
    for (const auto& [label, br] : table_) {
      if (cap < 0 || label <= cap) out.push_back(label);
    }
    return out;
  }
  const long last = cap < 0 ? cap_ : cap;
  for (long l = first_; l <= last; ++l) {
    if (member_(l)) out.push_back(l);
  }
  return out;
}

bool IntervalIFS::contains(long label) const {
  if (finite_) return table_.count(label) != 0;
  return label >= first_ && member_(label).has_value();
}

Branch IntervalIFS::branch(long label) const {
  if (finite_) {
    auto it = table_.find(label);
    if (it == table_.end()) {
      throw std::invalid_argument("no branch with label " + std::to_string(label));
    }
    return it->second;
  }
  if (label >= first_) {
    if (auto b = member_(label)) return *b;
  }
  throw std::invalid_argument("no branch with label " + std::to_string(label));
}

// --- INCSystem ---------------------------------------------------------------

std::string to_string(Digit d) {
  return "(" + std::to_string(d.row) + "," + std::to_string(d.index) + ")";
}

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::warn: return "WARN";
    case CheckStatus::fail: return "FAIL";
  }
  return "?";
}

bool ValidationReport::has(CheckStatus s) const {
  return std::any_of(entries.begin(), entries.end(),
                     [s](const Finding& f) { return f.status == s; });
}

const Finding* ValidationReport::find(std::string_view check) const {
  for (const auto& f : entries) {
    if (f.check == check) return &f;
  }
  return nullptr;
}

INCSystem::INCSystem(std::string name, IntervalIFS vertical, std::map<int, IntervalIFS> rows)
    : name_(std::move(name)), vertical_(std::move(vertical)), rows_(std::move(rows)) {
  if (!vertical_.is_finite()) throw std::invalid_argument("vertical alphabet must be finite");
  if (rows_.empty()) throw std::invalid_argument("system has no rows");
  for (const auto& [i, fam] : rows_) {
    if (!vertical_.contains(i)) {
      throw std::invalid_argument("row " + std::to_string(i) + " has no vertical branch");
    }
    const DerivRange r = deriv_range(vertical_.branch(i));
    b_sup_[i] = r.sup_abs;
    b_inf_[i] = r.inf_abs;
  }
}

const IntervalIFS& INCSystem::row(int i) const {
  auto it = rows_.find(i);
  if (it == rows_.end()) throw std::invalid_argument("no row " + std::to_string(i));
  return it->second;
}

std::vector<int> INCSystem::vertical_digits() const {
  std::vector<int> out;
  for (const auto& [i, fam] : rows_) out.push_back(i);
  return out;
}

std::vector<Digit> INCSystem::digits() const {
  std::vector<Digit> out;
  for (const auto& [i, fam] : rows_) {
    for (long j : fam.labels()) out.push_back({i, j});
  }
  return out;
}

bool INCSystem::is_finite() const {
  return std::all_of(rows_.begin(), rows_.end(), [](const auto& kv) { return kv.second.is_finite(); });
}

bool INCSystem::contains(Digit d) const {
  auto it = rows_.find(d.row);
  return it != rows_.end() && it->second.contains(d.index);
}

Branch INCSystem::horizontal_branch(Digit d) const { return row(d.row).branch(d.index); }

Branch INCSystem::vertical_branch(int i) const {
  if (!rows_.count(i)) throw std::invalid_argument("no row " + std::to_string(i));
  return vertical_.branch(i);
}

double INCSystem::a(Digit d) const { return deriv_range(horizontal_branch(d)).sup_abs; }

double INCSystem::b(int i) const {
  auto it = b_sup_.find(i);
  if (it == b_sup_.end()) throw std::invalid_argument("no row " + std::to_string(i));
  return it->second;
}

double INCSystem::b_inf(int i) const {
  auto it = b_inf_.find(i);
  if (it == b_inf_.end()) throw std::invalid_argument("no row " + std::to_string(i));
  return it->second;
}

double INCSystem::b_min() const {
  double m = 1.0;
  for (const auto& [i, v] : b_sup_) m = std::min(m, v);
  return m;
}

INCSystem INCSystem::with_validation(ValidationReport report) const {
  INCSystem copy = *this;
  copy.validation_ = std::move(report);
  return copy;
}

std::uint64_t INCSystem::fingerprint() const {
  std::uint64_t h = fnv1a(name_);
  for (const auto& [i, fam] : rows_) {
    h = fnv1a("v" + std::to_string(i) + describe(vertical_.branch(i)), h);
    for (long j : fam.labels()) {
      h = fnv1a("h" + std::to_string(j) + describe(fam.branch(j)), h);
    }
  }
  return h;
}

// --- truncations -------------------------------------------------------------

DigitTruncation DigitTruncation::from_digits(std::span<const Digit> digits) {
  DigitTruncation F;
  for (Digit d : digits) F.rows[d.row].push_back(d.index);
  for (auto& [i, labels] : F.rows) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  }
  return F;
}

std::vector<Digit> DigitTruncation::digits() const {
  std::vector<Digit> out;
  for (const auto& [i, labels] : rows) {
    for (long j : labels) out.push_back({i, j});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t DigitTruncation::size() const { return digits().size(); }

INCSystem truncate(const INCSystem& system, const DigitTruncation& F) {
  if (F.rows.empty()) throw std::invalid_argument("truncation is empty");
  std::vector<long> vlabels;
  std::vector<Branch> vbranches;
  std::map<int, IntervalIFS> rows;
  for (const auto& [i, labels_in] : F.rows) {
    if (labels_in.empty()) {
      throw std::invalid_argument("truncation leaves row " + std::to_string(i) + " empty");
    }
    if (!system.rows().count(i)) {
      throw std::invalid_argument("truncation names row " + std::to_string(i) +
                                  " which is not in the system");
    }
    std::vector<long> labels = labels_in;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    const IntervalIFS& fam = system.row(i);
    std::vector<Branch> branches;
    for (long j : labels) {
      if (!fam.contains(j)) {
        throw std::invalid_argument("digit " + to_string(Digit{i, j}) + " is not in the system");
      }
      branches.push_back(fam.branch(j));
    }
    rows.emplace(i, IntervalIFS::finite(std::move(labels), std::move(branches),
                                        fam.contraction_ratio(), fam.distortion_sequence()));
    vlabels.push_back(i);
    vbranches.push_back(system.vertical().branch(i));
  }
  IntervalIFS vertical =
      IntervalIFS::finite(std::move(vlabels), std::move(vbranches),
                          system.vertical().contraction_ratio(),
                          system.vertical().distortion_sequence());
  INCSystem out(system.name(), std::move(vertical), std::move(rows));
  if (system.validation()) out = out.with_validation(*system.validation());
  return out;
}

INCSystem exclude_violations(const INCSystem& system, const ValidationReport& report) {
  std::map<int, std::set<long>> drop;
  for (Digit d : report.dominance_violations) drop[d.row].insert(d.index);
  std::map<int, IntervalIFS> rows;
  for (const auto& [i, fam] : system.rows()) {
    auto it = drop.find(i);
    if (it == drop.end()) {
      rows.emplace(i, fam);
      continue;
    }
    const std::set<long> excluded = it->second;
    if (fam.is_finite()) {
      std::vector<long> labels;
      std::vector<Branch> branches;
      for (long j : fam.labels()) {
        if (excluded.count(j)) continue;
        labels.push_back(j);
        branches.push_back(fam.branch(j));
      }
      if (labels.empty()) continue;
      rows.emplace(i, IntervalIFS::finite(std::move(labels), std::move(branches),
                                          fam.contraction_ratio(), fam.distortion_sequence()));
    } else {
      IntervalIFS inner = fam;
      auto member = [inner, excluded](long l) -> std::optional<Branch> {
        if (excluded.count(l) || !inner.contains(l)) return std::nullopt;
        return inner.branch(l);
      };
      rows.emplace(i, IntervalIFS::countable(member, 1, fam.enumeration_cap(),
                                             fam.contraction_ratio(), fam.distortion_sequence()));
    }
  }
  if (rows.empty()) throw std::invalid_argument("excluding violations leaves no digits");
  return INCSystem(system.name(), system.vertical(), std::move(rows));
}

DigitTruncation truncation_by_index(const INCSystem& system, long max_index) {
  DigitTruncation F;
  for (const auto& [i, fam] : system.rows()) {
    std::vector<long> labels;
    for (long j : fam.labels()) {
      if (j <= max_index) labels.push_back(j);
    }
    if (!labels.empty()) F.rows.emplace(i, std::move(labels));
  }
  if (F.rows.empty()) {
    throw std::invalid_argument("no digits with label <= " + std::to_string(max_index));
  }
  return F;
}

// --- validation --------------------------------------------------------------

namespace {

struct WordScan {
  std::vector<double> worst_log_sup;   // index n-1
  std::vector<double> worst_log_dist;  // log(sup/inf)
  bool sampled = false;
};

WordScan scan_words(const IntervalIFS& ifs, int depth, std::size_t budget) {
  std::vector<Branch> branches;
  for (long l : ifs.labels()) branches.push_back(ifs.branch(l));
  std::stable_sort(branches.begin(), branches.end(), [](const Branch& u, const Branch& v) {
    return deriv_range(u).sup_abs > deriv_range(v).sup_abs;
  });
  WordScan scan;
  for (int n = 1; n <= depth; ++n) {
    std::size_t k = branches.size();
    while (k > 1 && std::pow(static_cast<double>(k), n) > static_cast<double>(budget)) --k;
    if (k < branches.size()) scan.sampled = true;
    std::vector<std::size_t> odo(static_cast<std::size_t>(n), 0);
    std::vector<const Branch*> word(static_cast<std::size_t>(n));
    double worst_sup = -std::numeric_limits<double>::infinity();
    double worst_dist = 0.0;
    for (;;) {
      for (int p = 0; p < n; ++p) word[p] = &branches[odo[p]];
      const LogDerivRange r = composed_log_deriv_range(word);
      worst_sup = std::max(worst_sup, r.log_sup);
      worst_dist = std::max(worst_dist, r.log_sup - r.log_inf);
      int p = n - 1;
      while (p >= 0 && ++odo[p] == k) odo[p--] = 0;
      if (p < 0) break;
    }
    scan.worst_log_sup.push_back(worst_sup);
    scan.worst_log_dist.push_back(worst_dist);
  }
  return scan;
}

struct IfsFindings {
  std::string name;
  std::optional<int> horizon;
  bool sampled = false;
  bool tdp_ok = true;
  int tdp_bad_n = 0;
  std::optional<std::pair<long, long>> overlap;
};

double tie_slack(double magnitude) { return kContainmentSlack * std::max(1.0, std::fabs(magnitude)); }

IfsFindings check_ifs(std::string name, const IntervalIFS& ifs, const ValidationOptions& opts) {
  IfsFindings out;
  out.name = std::move(name);
  const int depth = std::max(1, opts.depth_budget);
  const WordScan scan = scan_words(ifs, depth, opts.word_budget);
  out.sampled = scan.sampled;

  const double log_xi = std::log(ifs.contraction_ratio());
  for (int N = 1; N <= depth && !out.horizon; ++N) {
    bool ok = true;
    for (int n = N; n <= depth && ok; ++n) {
      const double bound = n * log_xi;
      ok = scan.worst_log_sup[n - 1] <= bound + tie_slack(bound);
    }
    if (ok) out.horizon = N;
  }

  for (int n = 1; n <= depth; ++n) {
    const double bound = n * ifs.distortion(n);
    if (scan.worst_log_dist[n - 1] > bound + tie_slack(bound)) {
      out.tdp_ok = false;
      out.tdp_bad_n = n;
      break;
    }
  }

  std::vector<std::pair<Interval, long>> images;
  for (long l : ifs.labels()) images.emplace_back(image(ifs.branch(l), kUnitInterval), l);
  std::sort(images.begin(), images.end(),
            [](const auto& u, const auto& v) { return u.first.lo < v.first.lo; });
  for (std::size_t k = 1; k < images.size(); ++k) {
    // Open images overlap when the next one starts strictly inside the previous.
    if (images[k].first.lo < images[k - 1].first.hi - kContainmentSlack) {
      out.overlap = std::minmax(images[k - 1].second, images[k].second);
      break;
    }
  }
  return out;
}

}  // namespace

ValidationReport validate(const INCSystem& system, const ValidationOptions& opts) {
  std::vector<IfsFindings> parts;
  parts.push_back(check_ifs("vertical", system.vertical(), opts));
  for (const auto& [i, fam] : system.rows()) {
    parts.push_back(check_ifs("row " + std::to_string(i), fam, opts));
  }

  ValidationReport report;

  {
    Finding f{"UCC", CheckStatus::pass, ""};
    int horizon = 1;
    std::ostringstream w;
    for (const auto& p : parts) {
      if (!w.str().empty()) w << ", ";
      w << p.name << (p.horizon ? " N=" + std::to_string(*p.horizon) : std::string(" no horizon"));
      if (p.sampled) w << " (sampled)";
      if (p.horizon) {
        horizon = std::max(horizon, *p.horizon);
      } else {
        f.status = CheckStatus::fail;
      }
    }
    if (f.status == CheckStatus::pass) {
      report.ucc_horizon = horizon;
      f.witness = "N=" + std::to_string(horizon) + " [" + w.str() + "]";
    } else {
      f.witness = "no horizon <= " + std::to_string(opts.depth_budget) + " [" + w.str() + "]";
    }
    report.entries.push_back(std::move(f));
  }

  {
    Finding f{"OIC", CheckStatus::pass, "images of (0,1) pairwise disjoint"};
    for (const auto& p : parts) {
      if (p.overlap) {
        f.status = CheckStatus::fail;
        f.witness = p.name + ": branches " + std::to_string(p.overlap->first) + " and " +
                    std::to_string(p.overlap->second) + " overlap";
        report.oic_overlap = p.overlap;
        break;
      }
    }
    report.entries.push_back(std::move(f));
  }

  {
    Finding f{"TDP", CheckStatus::pass, "distortion within e^{n rho_n} for n <= " +
                                            std::to_string(opts.depth_budget)};
    for (const auto& p : parts) {
      if (!p.tdp_ok) {
        f.status = CheckStatus::fail;
        f.witness = p.name + ": distortion bound exceeded at n=" + std::to_string(p.tdp_bad_n);
        break;
      }
    }
    report.entries.push_back(std::move(f));
  }

  {
    Finding f{"dominance", CheckStatus::pass, "sup|f_ij'| <= inf|g_i'| for all digits"};
    for (Digit d : system.digits()) {
      const double a = system.a(d);
      const double binf = system.b_inf(d.row);
      if (a > binf * (1.0 + kContainmentSlack)) report.dominance_violations.push_back(d);
    }
    if (!report.dominance_violations.empty()) {
      f.status = CheckStatus::warn;
      std::ostringstream w;
      w << "violated by";
      for (Digit d : report.dominance_violations) {
        w << ' ' << to_string(d) << " sup|f'|=" << fmt17(system.a(d))
          << " > inf|g'|=" << fmt17(system.b_inf(d.row));
      }
      f.witness = w.str();
    }
    report.entries.push_back(std::move(f));
  }
  return report;
}

// --- built-in systems --------------------------------------------------------

INCSystem bedford_mcmullen(int m, int n, std::vector<std::pair<int, int>> cells) {
  if (m < 2) throw std::invalid_argument("bedford_mcmullen: m must be >= 2");
  if (n < m) throw std::invalid_argument("bedford_mcmullen: n must be >= m");
  if (cells.empty()) throw std::invalid_argument("bedford_mcmullen: no cells selected");
  std::sort(cells.begin(), cells.end());
  if (std::adjacent_find(cells.begin(), cells.end()) != cells.end()) {
    throw std::invalid_argument("bedford_mcmullen: duplicate cell");
  }
  std::map<int, std::pair<std::vector<long>, std::vector<Branch>>> by_row;
  for (auto [r, c] : cells) {
    if (r < 0 || r >= m || c < 0 || c >= n) {
      throw std::invalid_argument("bedford_mcmullen: cell (" + std::to_string(r) + "," +
                                  std::to_string(c) + ") outside the " + std::to_string(m) +
                                  "x" + std::to_string(n) + " grid");
    }
    by_row[r].first.push_back(c);
    by_row[r].second.push_back(Affine{1.0 / n, static_cast<double>(c) / n});
  }
  std::vector<long> vlabels;
  std::vector<Branch> vbranches;
  std::map<int, IntervalIFS> rows;
  for (auto& [r, lb] : by_row) {
    vlabels.push_back(r);
    vbranches.push_back(Affine{1.0 / m, static_cast<double>(r) / m});
    rows.emplace(r, IntervalIFS::finite(std::move(lb.first), std::move(lb.second), 1.0 / n));
  }
  std::ostringstream name;
  name << "bedford_mcmullen(" << m << "," << n << ",[";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    name << (k ? "," : "") << cells[k].first << ":" << cells[k].second;
  }
  name << "])";
  return INCSystem(name.str(), IntervalIFS::finite(vlabels, vbranches, 1.0 / m), std::move(rows));
}

INCSystem bedford_mcmullen_rows(int m, int n, std::span<const int> row_counts) {
  if (static_cast<int>(row_counts.size()) > m) {
    throw std::invalid_argument("bedford_mcmullen: more row counts than rows");
  }
  std::vector<std::pair<int, int>> cells;
  for (std::size_t r = 0; r < row_counts.size(); ++r) {
    if (row_counts[r] < 0 || row_counts[r] > n) {
      throw std::invalid_argument("bedford_mcmullen: row count out of range");
    }
    for (int c = 0; c < row_counts[r]; ++c) cells.emplace_back(static_cast<int>(r), c);
  }
  return bedford_mcmullen(m, n, std::move(cells));
}

namespace {

IntervalIFS binary_vertical() {
  return IntervalIFS::finite({0, 1}, {BinaryBranch{0, 2}, BinaryBranch{1, 2}}, 0.5);
}

// Continued-fraction compositions have distortion at most 4.
double gauss_rho(int n) { return std::log(4.0) / std::max(1, n); }

}  // namespace

INCSystem gauss_renyi(GaussDigitRule rule, long max_index) {
  if (max_index < 1) throw std::invalid_argument("gauss_renyi: empty digit range");
  std::map<int, IntervalIFS> rows;
  for (int b = 0; b < 2; ++b) {
    IntervalIFS::Member member = [rule, b](long n) -> std::optional<Branch> {
      if (n < 1) return std::nullopt;
      if (rule == GaussDigitRule::n_mod_2 && n % 2 != b) return std::nullopt;
      return GaussBranch{n};
    };
    IntervalIFS fam = IntervalIFS::countable(member, 1, max_index, 0.5, gauss_rho);
    if (!fam.labels().empty()) rows.emplace(b, std::move(fam));
  }
  const std::string name = std::string("gauss_renyi(") +
                           (rule == GaussDigitRule::n_mod_2 ? "n_mod_2" : "all") + ")";
  return INCSystem(name, binary_vertical(), std::move(rows));
}

INCSystem gauss_renyi(std::span<const std::pair<long, int>> digits) {
  if (digits.empty()) throw std::invalid_argument("gauss_renyi: empty digit list");
  std::map<int, std::set<long>> by_row;
  for (auto [n, b] : digits) {
    if (n < 1 || (b != 0 && b != 1)) {
      throw std::invalid_argument("gauss_renyi: digit (" + std::to_string(n) + "," +
                                  std::to_string(b) + ") outside N x {0,1}");
    }
    by_row[b].insert(n);
  }
  std::map<int, IntervalIFS> rows;
  std::ostringstream name;
  name << "gauss_renyi([";
  bool first = true;
  for (const auto& [b, ns] : by_row) {
    std::vector<long> labels(ns.begin(), ns.end());
    std::vector<Branch> branches;
    for (long n : labels) {
      branches.push_back(GaussBranch{n});
      name << (first ? "" : ",") << n << ":" << b;
      first = false;
    }
    rows.emplace(b, IntervalIFS::finite(std::move(labels), std::move(branches), 0.5, gauss_rho));
  }
  name << "])";
  return INCSystem(name.str(), binary_vertical(), std::move(rows));
}

INCSystem lalley_gatzouras(std::span<const LGRow> rows_in) {
  if (rows_in.empty()) throw std::invalid_argument("lalley_gatzouras: no rows");
  double y = 0.0;
  double vmax = 0.0;
  std::vector<long> vlabels;
  std::vector<Branch> vbranches;
  std::map<int, IntervalIFS> rows;
  for (std::size_t i = 0; i < rows_in.size(); ++i) {
    const LGRow& r = rows_in[i];
    if (!(r.height > 0.0 && r.height < 1.0)) {
      throw std::invalid_argument("lalley_gatzouras: row height outside (0,1)");
    }
    if (r.widths.empty()) throw std::invalid_argument("lalley_gatzouras: empty row");
    double x = 0.0;
    double hmax = 0.0;
    std::vector<long> labels;
    std::vector<Branch> branches;
    for (std::size_t j = 0; j < r.widths.size(); ++j) {
      const double w = r.widths[j];
      if (!(w > 0.0 && w < 1.0)) {
        throw std::invalid_argument("lalley_gatzouras: cell width outside (0,1)");
      }
      labels.push_back(static_cast<long>(j));
      branches.push_back(Affine{w, x});
      x += w;
      hmax = std::max(hmax, w);
    }
    if (x > 1.0 + kContainmentSlack) {
      throw std::invalid_argument("lalley_gatzouras: widths of row " + std::to_string(i) +
                                  " exceed 1");
    }
    vlabels.push_back(static_cast<long>(i));
    vbranches.push_back(Affine{r.height, y});
    y += r.height;
    vmax = std::max(vmax, r.height);
    rows.emplace(static_cast<int>(i),
                 IntervalIFS::finite(std::move(labels), std::move(branches), hmax));
  }
  if (y > 1.0 + kContainmentSlack) throw std::invalid_argument("lalley_gatzouras: heights exceed 1");
  return INCSystem("lalley_gatzouras", IntervalIFS::finite(vlabels, vbranches, vmax),
                   std::move(rows));
}

}  // namespace incdim
