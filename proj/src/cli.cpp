#include "incdim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "incdim/boxcount.hpp"
#include "incdim/numeric.hpp"
#include "incdim/spectrum.hpp"

namespace incdim::cli {

using nlohmann::json;

namespace {

// --- schema helpers ----------------------------------------------------------

std::string child(const std::string& path, std::string_view key) {
  std::string out = path + "/";
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (allowed.count(key) == 0) throw SchemaError(child(path, key), "unknown key");
  }
}

const json* find(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  const json* v = find(obj, key);
  if (v == nullptr) throw SchemaError(child(path, key), "required key is missing");
  return *v;
}

long as_int(const json& v, const std::string& path, long min = LONG_MIN, long max = LONG_MAX) {
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  const long x = v.get<long>();
  if (x < min) throw SchemaError(path, "must be >= " + std::to_string(min));
  if (x > max) throw SchemaError(path, "must be <= " + std::to_string(max));
  return x;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  return v.get<double>();
}

double as_positive(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (!(x > 0.0)) throw SchemaError(path, "must be positive");
  return x;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw SchemaError(path, "expected true or false");
  return v.get<bool>();
}

const json& as_array(const json& v, const std::string& path, bool nonempty = true) {
  if (!v.is_array()) throw SchemaError(path, "expected an array");
  if (nonempty && v.empty()) throw SchemaError(path, "must not be empty");
  return v;
}

std::vector<long> int_list(const json& v, const std::string& path, long min) {
  std::vector<long> out;
  for (std::size_t k = 0; k < as_array(v, path).size(); ++k) out.push_back(as_int(v[k], child(path, k), min));
  return out;
}

std::vector<double> number_list(const json& v, const std::string& path) {
  std::vector<double> out;
  for (std::size_t k = 0; k < as_array(v, path).size(); ++k) out.push_back(as_number(v[k], child(path, k)));
  return out;
}

void strictly_increasing(const std::vector<long>& xs, const std::string& path) {
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (xs[k] <= xs[k - 1]) throw SchemaError(child(path, k), "values must be strictly increasing");
  }
}

// --- systems ----------------------------------------------------------------

Branch parse_branch(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string type = as_string(require(j, "type", path), child(path, "type"));
  if (type == "affine") {
    check_keys(j, path, {"type", "ratio", "offset", "reversed", "label"});
    Affine a;
    a.ratio = as_positive(require(j, "ratio", path), child(path, "ratio"));
    if (const json* v = find(j, "offset")) a.offset = as_number(*v, child(path, "offset"));
    if (const json* v = find(j, "reversed")) a.reversed = as_bool(*v, child(path, "reversed"));
    return a;
  }
  if (type == "gauss") {
    check_keys(j, path, {"type", "a", "label"});
    return GaussBranch{as_int(require(j, "a", path), child(path, "a"), 1)};
  }
  if (type == "binary") {
    check_keys(j, path, {"type", "b", "base", "label"});
    BinaryBranch b;
    b.base = static_cast<int>(as_int(find(j, "base") ? j["base"] : json(2), child(path, "base"), 2, 1 << 20));
    b.b = static_cast<int>(as_int(require(j, "b", path), child(path, "b"), 0, b.base - 1));
    return b;
  }
  throw SchemaError(child(path, "type"), "expected \"affine\", \"gauss\" or \"binary\"");
}

IntervalIFS parse_ifs(const json& j, const std::string& path, long first_label) {
  std::vector<long> labels;
  std::vector<Branch> branches;
  double xi = 0.0;
  for (std::size_t k = 0; k < as_array(j, path).size(); ++k) {
    const std::string p = child(path, k);
    branches.push_back(parse_branch(j[k], p));
    const json* label = find(j[k], "label");
    labels.push_back(label ? as_int(*label, child(p, "label")) : first_label + static_cast<long>(k));
    xi = std::max(xi, deriv_range(branches.back()).sup_abs);
  }
  // A non-contracting branch (CF digit 1) still belongs to a family whose
  // two-fold compositions contract; 1/2 matches the built-in Gauss families.
  if (!(xi < 1.0)) xi = 0.5;
  try {
    return IntervalIFS::finite(labels, branches, xi);
  } catch (const std::exception& e) {
    throw SchemaError(path, e.what());
  }
}

INCSystem parse_system(const json& j, const std::string& path) {
  require_object(j, path);
  if (find(j, "builtin") == nullptr) {
    check_keys(j, path, {"name", "vertical", "rows"});
    const std::string name = find(j, "name") ? as_string(j["name"], child(path, "name")) : "explicit";
    const json& vertical = require(j, "vertical", path);
    const IntervalIFS v = parse_ifs(vertical, child(path, "vertical"), 0);
    const json& rows = as_array(require(j, "rows", path), child(path, "rows"));
    if (rows.size() != vertical.size()) {
      throw SchemaError(child(path, "rows"), "need one branch list per vertical branch");
    }
    std::map<int, IntervalIFS> families;
    const std::vector<long> vlabels = v.labels();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      families.emplace(static_cast<int>(vlabels[k]), parse_ifs(rows[k], child(child(path, "rows"), k), 1));
    }
    return INCSystem(name, v, std::move(families));
  }
  const std::string builtin = as_string(j["builtin"], child(path, "builtin"));
  if (builtin == "bedford_mcmullen") {
    check_keys(j, path, {"builtin", "m", "n", "rows", "cells"});
    const int m = static_cast<int>(as_int(require(j, "m", path), child(path, "m"), 2, 1 << 16));
    const int n = static_cast<int>(as_int(require(j, "n", path), child(path, "n"), m, 1 << 16));
    if ((find(j, "rows") == nullptr) == (find(j, "cells") == nullptr)) {
      throw SchemaError(path, "give exactly one of \"rows\" and \"cells\"");
    }
    if (const json* rows = find(j, "rows")) {
      std::vector<int> t;
      for (long x : int_list(*rows, child(path, "rows"), 0)) t.push_back(static_cast<int>(x));
      if (static_cast<int>(t.size()) != m) throw SchemaError(child(path, "rows"), "need one count per row");
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] > n) throw SchemaError(child(child(path, "rows"), k), "row count exceeds n");
      }
      if (std::all_of(t.begin(), t.end(), [](int x) { return x == 0; })) {
        throw SchemaError(child(path, "rows"), "every row is empty");
      }
      return bedford_mcmullen_rows(m, n, t);
    }
    const std::string cp = child(path, "cells");
    std::vector<std::pair<int, int>> cells;
    for (std::size_t k = 0; k < as_array(j["cells"], cp).size(); ++k) {
      const std::string p = child(cp, k);
      const json& c = j["cells"][k];
      if (!c.is_array() || c.size() != 2) throw SchemaError(p, "expected [row, column]");
      cells.emplace_back(static_cast<int>(as_int(c[0], child(p, 0), 0, m - 1)),
                         static_cast<int>(as_int(c[1], child(p, 1), 0, n - 1)));
    }
    try {
      return bedford_mcmullen(m, n, cells);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(cp, e.what());
    }
  }
  if (builtin == "gauss_renyi") {
    check_keys(j, path, {"builtin", "digits", "max_n"});
    const json& digits = require(j, "digits", path);
    const std::string dp = child(path, "digits");
    if (digits.is_string()) {
      const std::string rule = digits.get<std::string>();
      const long max_n = as_int(require(j, "max_n", path), child(path, "max_n"), 1, 1L << 24);
      if (rule == "n_mod_2") return gauss_renyi(GaussDigitRule::n_mod_2, max_n);
      if (rule == "all") return gauss_renyi(GaussDigitRule::all, max_n);
      throw SchemaError(dp, "expected \"n_mod_2\", \"all\" or a list of [n, b] pairs");
    }
    if (find(j, "max_n") != nullptr) throw SchemaError(child(path, "max_n"), "only valid with a digit rule");
    std::vector<std::pair<long, int>> list;
    for (std::size_t k = 0; k < as_array(digits, dp).size(); ++k) {
      const std::string p = child(dp, k);
      const json& c = digits[k];
      if (!c.is_array() || c.size() != 2) throw SchemaError(p, "expected [n, b]");
      list.emplace_back(as_int(c[0], child(p, 0), 1), static_cast<int>(as_int(c[1], child(p, 1), 0, 1)));
    }
    try {
      return gauss_renyi(list);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(dp, e.what());
    }
  }
  if (builtin == "lalley_gatzouras") {
    check_keys(j, path, {"builtin", "rows"});
    const std::string rp = child(path, "rows");
    std::vector<LGRow> rows;
    for (std::size_t k = 0; k < as_array(require(j, "rows", path), rp).size(); ++k) {
      const std::string p = child(rp, k);
      const json& r = j["rows"][k];
      require_object(r, p);
      check_keys(r, p, {"height", "widths"});
      LGRow row;
      row.height = as_positive(require(r, "height", p), child(p, "height"));
      row.widths = number_list(require(r, "widths", p), child(p, "widths"));
      rows.push_back(std::move(row));
    }
    try {
      return lalley_gatzouras(rows);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(rp, e.what());
    }
  }
  throw SchemaError(child(path, "builtin"),
                    "expected \"bedford_mcmullen\", \"gauss_renyi\" or \"lalley_gatzouras\"");
}

// --- potentials and constraints ----------------------------------------------

void parse_potential_into(const json& j, const std::string& path, bool allow_family, std::vector<Potential>& out) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "digit_value") {
      out.push_back(potentials::digit_value());
    } else if (name == "log_digit") {
      out.push_back(potentials::log_digit());
    } else if (name == "vertical_digit") {
      out.push_back(potentials::vertical_digit());
    } else {
      throw SchemaError(path, "unknown potential \"" + name + "\"");
    }
    return;
  }
  require_object(j, path);
  const std::string kind = as_string(require(j, "kind", path), child(path, "kind"));
  if (kind == "row_indicator") {
    check_keys(j, path, {"kind", "row"});
    out.push_back(potentials::row_indicator(static_cast<int>(as_int(require(j, "row", path), child(path, "row"), 0, INT_MAX))));
  } else if (kind == "digit_indicator") {
    check_keys(j, path, {"kind", "k"});
    out.push_back(potentials::digit_indicator(as_int(require(j, "k", path), child(path, "k"))));
  } else if (kind == "digit_indicators" && allow_family) {
    check_keys(j, path, {"kind", "count"});
    const long count = as_int(require(j, "count", path), child(path, "count"), 1, 1 << 16);
    for (long k = 1; k <= count; ++k) out.push_back(potentials::digit_indicator(k));
  } else {
    throw SchemaError(child(path, "kind"), "unknown potential kind \"" + kind + "\"");
  }
}

Potential parse_potential(const json& j, const std::string& path) {
  std::vector<Potential> out;
  parse_potential_into(j, path, false, out);
  return out.front();
}

double parse_target(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw SchemaError(path, "expected a number, \"inf\" or \"-inf\"");
  }
  return as_number(j, path);
}

struct ConstraintRef {
  Potential potential;
  ConstraintKind kind;
};

ConstraintRef parse_constraint(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"potential", "equals", "alpha", "m", "above", "below"});
  ConstraintRef c{parse_potential(require(j, "potential", path), child(path, "potential")), Equality{}};
  const int forms = (find(j, "equals") != nullptr) + (find(j, "alpha") != nullptr) +
                    (find(j, "above") != nullptr) + (find(j, "below") != nullptr);
  if (forms != 1) throw SchemaError(path, "give exactly one of \"equals\", \"alpha\" (with \"m\"), \"above\", \"below\"");
  if (const json* v = find(j, "equals")) {
    c.kind = Equality{as_number(*v, child(path, "equals"))};
  } else if (const json* v = find(j, "alpha")) {
    c.kind = Window{as_number(*v, child(path, "alpha")),
                    static_cast<double>(as_int(require(j, "m", path), child(path, "m"), 1))};
  } else if (const json* v = find(j, "above")) {
    c.kind = LowerBound{static_cast<double>(as_int(*v, child(path, "above"), 1))};
  } else {
    c.kind = UpperBound{static_cast<double>(as_int(j["below"], child(path, "below"), 1))};
  }
  if (find(j, "m") != nullptr && find(j, "alpha") == nullptr) {
    throw SchemaError(child(path, "m"), "only valid with \"alpha\"");
  }
  return c;
}

// --- parameters -------------------------------------------------------------

const std::set<std::string> kCommands = {"dim", "sweep", "spectrum", "levelset", "render", "boxdim", "validate"};

struct Plan {
  std::string command;
  int level = 1;
  OptConfig opt;
  std::string output;
  std::optional<long> max_n;
  std::vector<ConstraintRef> constraints;
  std::vector<long> schedule;
  std::vector<Potential> potentials;
  std::vector<double> alphas;
  std::vector<double> targets;
  std::vector<int> m_schedule;
  std::vector<long> truncations;
  bool grid = false;
  double target_width = 0.0;
  std::size_t cap = std::size_t{1} << 22;
  std::vector<double> scales = default_scales();
  ValidationOptions vopts;
};

std::set<std::string> allowed_params(const std::string& command) {
  std::set<std::string> keys = {"output", "depth_budget", "word_budget"};
  const std::set<std::string> opt = {"level", "depth", "starts", "seed", "max_inner_iterations",
                                     "max_outer_rounds", "equality_tolerance", "strict_slack",
                                     "prune_threshold", "objective_budget", "bracket_budget"};
  auto add = [&keys](std::initializer_list<const char*> more) {
    for (const char* k : more) keys.insert(k);
  };
  if (command == "dim" || command == "sweep" || command == "spectrum" || command == "levelset") {
    keys.insert(opt.begin(), opt.end());
  }
  if (command == "dim") add({"max_n", "constraints"});
  if (command == "sweep") add({"schedule", "constraints"});
  if (command == "spectrum") add({"max_n", "potential", "alphas"});
  if (command == "levelset") add({"potentials", "targets", "m_schedule", "truncations", "mode"});
  if (command == "render") add({"max_n", "target_width", "cap", "seed"});
  if (command == "boxdim") add({"max_n", "target_width", "cap", "scales", "seed"});
  if (command == "validate") add({"seed"});
  return keys;
}

std::vector<double> parse_alphas(const json& j, const std::string& path) {
  if (j.is_array()) return number_list(j, path);
  require_object(j, path);
  check_keys(j, path, {"from", "to", "step"});
  const double from = as_number(require(j, "from", path), child(path, "from"));
  const double to = as_number(require(j, "to", path), child(path, "to"));
  const double step = as_positive(require(j, "step", path), child(path, "step"));
  if (to < from) throw SchemaError(child(path, "to"), "must be >= from");
  const double count = std::floor((to - from) / step + 1e-9);
  if (count > 1e6) throw SchemaError(child(path, "step"), "grid has more than 10^6 points");
  std::vector<double> out;
  for (long k = 0; k <= static_cast<long>(count); ++k) out.push_back(from + static_cast<double>(k) * step);
  return out;
}

Plan parse_plan(const std::string& command, const json& params) {
  const std::string path = "/params";
  require_object(params, path);
  check_keys(params, path, allowed_params(command));
  Plan p;
  p.command = command;
  p.output = command == "render" ? "cover.txt" : command + ".csv";
  auto get = [&params](const char* key) { return find(params, key); };
  auto at = [&path](const char* key) { return child(path, key); };

  if (const json* v = get("level")) p.level = static_cast<int>(as_int(*v, at("level"), 1, 64));
  if (const json* v = get("depth")) p.opt.objective_depth = static_cast<int>(as_int(*v, at("depth"), 1, 64));
  if (const json* v = get("starts")) p.opt.starts = static_cast<int>(as_int(*v, at("starts"), 1, 1 << 16));
  if (const json* v = get("seed")) p.opt.seed = static_cast<std::uint64_t>(as_int(*v, at("seed"), 0));
  if (const json* v = get("max_inner_iterations")) {
    p.opt.max_inner_iterations = static_cast<int>(as_int(*v, at("max_inner_iterations"), 1, INT_MAX));
  }
  if (const json* v = get("max_outer_rounds")) {
    p.opt.max_outer_rounds = static_cast<int>(as_int(*v, at("max_outer_rounds"), 1, 64));
  }
  if (const json* v = get("equality_tolerance")) p.opt.equality_tolerance = as_positive(*v, at("equality_tolerance"));
  if (const json* v = get("strict_slack")) p.opt.strict_slack = as_positive(*v, at("strict_slack"));
  if (const json* v = get("prune_threshold")) p.opt.prune_threshold = as_positive(*v, at("prune_threshold"));
  if (const json* v = get("objective_budget")) {
    p.opt.objective_budget = static_cast<std::size_t>(as_int(*v, at("objective_budget"), 1));
  }
  if (const json* v = get("bracket_budget")) {
    p.opt.bracket_budget = static_cast<std::size_t>(as_int(*v, at("bracket_budget"), 1));
  }
  if (const json* v = get("output")) {
    p.output = as_string(*v, at("output"));
    if (p.output.empty() || p.output.find('/') != std::string::npos) {
      throw SchemaError(at("output"), "expected a plain file name inside the output directory");
    }
  }
  if (const json* v = get("depth_budget")) p.vopts.depth_budget = static_cast<int>(as_int(*v, at("depth_budget"), 1, 64));
  if (const json* v = get("word_budget")) {
    p.vopts.word_budget = static_cast<std::size_t>(as_int(*v, at("word_budget"), 1));
  }
  if (const json* v = get("max_n")) p.max_n = as_int(*v, at("max_n"), 1);
  if (const json* v = get("constraints")) {
    for (std::size_t k = 0; k < as_array(*v, at("constraints"), false).size(); ++k) {
      p.constraints.push_back(parse_constraint((*v)[k], child(at("constraints"), k)));
    }
  }

  if (command == "sweep") {
    p.schedule = int_list(require(params, "schedule", path), at("schedule"), 1);
    strictly_increasing(p.schedule, at("schedule"));
  } else if (command == "spectrum") {
    p.potentials.push_back(parse_potential(require(params, "potential", path), at("potential")));
    p.alphas = parse_alphas(require(params, "alphas", path), at("alphas"));
  } else if (command == "levelset") {
    const json& pots = as_array(require(params, "potentials", path), at("potentials"));
    for (std::size_t k = 0; k < pots.size(); ++k) {
      parse_potential_into(pots[k], child(at("potentials"), k), true, p.potentials);
    }
    const json& targets = as_array(require(params, "targets", path), at("targets"));
    for (std::size_t k = 0; k < targets.size(); ++k) p.targets.push_back(parse_target(targets[k], child(at("targets"), k)));
    if (p.targets.size() != 1 && p.targets.size() != p.potentials.size()) {
      throw SchemaError(at("targets"), "give one target per potential or a single shared target");
    }
    const std::vector<long> ms = int_list(require(params, "m_schedule", path), at("m_schedule"), 1);
    strictly_increasing(ms, at("m_schedule"));
    for (long m : ms) p.m_schedule.push_back(static_cast<int>(std::min<long>(m, INT_MAX)));
    p.truncations = int_list(require(params, "truncations", path), at("truncations"), 1);
    const std::string mode = find(params, "mode") ? as_string(params["mode"], at("mode")) : "diagonal";
    if (mode != "diagonal" && mode != "grid") throw SchemaError(at("mode"), "expected \"diagonal\" or \"grid\"");
    p.grid = mode == "grid";
    if (p.grid) {
      strictly_increasing(p.truncations, at("truncations"));
    } else if (p.truncations.size() != 1 && p.truncations.size() != p.m_schedule.size()) {
      throw SchemaError(at("truncations"), "diagonal mode needs one truncation per m or a single one");
    }
  } else if (command == "render" || command == "boxdim") {
    p.target_width = as_positive(require(params, "target_width", path), at("target_width"));
    if (!(p.target_width < 1.0)) throw SchemaError(at("target_width"), "must lie in (0, 1)");
    if (const json* v = get("cap")) p.cap = static_cast<std::size_t>(as_int(*v, at("cap"), 1));
    if (const json* v = get("scales")) {
      p.scales = number_list(*v, at("scales"));
      for (std::size_t k = 0; k < p.scales.size(); ++k) {
        if (!(p.scales[k] > 0.0 && p.scales[k] < 1.0)) throw SchemaError(child(at("scales"), k), "must lie in (0, 1)");
      }
    }
  }
  return p;
}

// --- output -----------------------------------------------------------------

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Artifact {
 public:
  Artifact(const Flags& flags, const std::string& name, const std::string& hash) {
    std::filesystem::create_directories(flags.out_dir);
    path_ = (std::filesystem::path(flags.out_dir) / name).string();
    file_.open(path_, std::ios::binary | std::ios::trunc);
    if (!file_) throw Error("cannot write " + path_);
    file_ << "# config_hash=" << hash << '\n';
    if (!flags.reproducible) file_ << "# generated=" << timestamp() << '\n';
  }
  std::ofstream& stream() { return file_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream file_;
};

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) out += ',';
    out += cells[k];
  }
  return out;
}

std::string flag(bool b) { return b ? "1" : "0"; }

double seconds_of(const OptResult& r, const Flags& flags) { return flags.reproducible ? 0.0 : r.seconds; }

std::string stem(const std::string& name) {
  const std::size_t dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

// --- command helpers --------------------------------------------------------

INCSystem finite_part(const INCSystem& sys, std::optional<long> max_n) {
  if (max_n) return truncate(sys, truncation_by_index(sys, *max_n));
  if (sys.is_finite()) return sys;
  const std::vector<Digit> d = sys.digits();
  return truncate(sys, DigitTruncation::from_digits(d));
}

std::shared_ptr<const PotentialTable> tabulate(const Potential& phi, const INCSystem& finite) {
  const std::vector<Digit> d = finite.digits();
  return std::make_shared<const PotentialTable>(PotentialTable::tabulate(phi, d));
}

std::vector<ConstraintSpec> tabulate_constraints(const std::vector<ConstraintRef>& refs, const INCSystem& finite) {
  std::vector<ConstraintSpec> out;
  for (const ConstraintRef& c : refs) out.push_back({tabulate(c.potential, finite), c.kind});
  return out;
}

void print_dim(std::ostream& out, const Bracket& b) {
  out << "dim_lower=" << fmt17(b.lower) << " dim_upper=" << fmt17(b.upper) << '\n';
}

int run_dim(const Plan& p, const INCSystem& sys, const Flags& flags, const std::string& hash, std::ostream& out) {
  const INCSystem fin = finite_part(sys, p.max_n);
  const OptResult r = maximize_dimension(fin, p.level, tabulate_constraints(p.constraints, fin), p.opt);
  Artifact csv(flags, p.output, hash);
  csv.stream() << "trunc_size,dim_lower,dim_upper,objective,objective_depth,kkt_residual,converged,iterations,"
                  "starts_used,seconds\n";
  csv.stream() << join({std::to_string(r.support.size()), fmt17(r.dimension.lower), fmt17(r.dimension.upper),
                        fmt17(r.objective), std::to_string(r.objective_depth), fmt17(r.kkt_residual),
                        flag(r.converged), std::to_string(r.iterations), std::to_string(r.starts_used),
                        fmt17(seconds_of(r, flags))})
               << '\n';
  Artifact weights(flags, stem(p.output) + "_weights.csv", hash);
  weights.stream() << "block,weight\n";
  const BernoulliMeasure mu = r.measure();
  for (std::size_t b = 0; b < mu.block_count(); ++b) {
    std::string label;
    for (Digit d : mu.block(b)) {
      if (!label.empty()) label += ' ';
      label += std::to_string(d.row) + ":" + std::to_string(d.index);
    }
    weights.stream() << label << ',' << fmt17(r.weights[b]) << '\n';
  }
  print_dim(out, r.dimension);
  return r.converged ? kExitOk : kExitNotConverged;
}

int run_sweep(const Plan& p, const INCSystem& sys, const Flags& flags, const std::string& hash, std::ostream& out) {
  std::vector<DigitTruncation> schedule;
  for (long n : p.schedule) schedule.push_back(truncation_by_index(sys, n));
  const INCSystem largest = truncate(sys, schedule.back());
  const SweepResult r = truncation_sweep(sys, schedule, p.level, tabulate_constraints(p.constraints, largest), p.opt);
  Artifact csv(flags, p.output, hash);
  csv.stream() << "trunc_size,dim_lower,dim_upper,kkt_residual,converged,iterations,seconds\n";
  bool converged = true;
  for (std::size_t k = 0; k < r.stages.size(); ++k) {
    const OptResult& s = r.stages[k];
    converged = converged && s.converged;
    csv.stream() << join({std::to_string(r.sizes[k]), fmt17(s.dimension.lower), fmt17(s.dimension.upper),
                          fmt17(s.kkt_residual), flag(s.converged), std::to_string(s.iterations),
                          fmt17(seconds_of(s, flags))})
                 << '\n';
  }
  print_dim(out, r.stages.back().dimension);
  out << "nondecreasing=" << (r.nondecreasing ? "true" : "false") << '\n';
  return converged ? kExitOk : kExitNotConverged;
}

int run_spectrum(const Plan& p, const INCSystem& sys, const Flags& flags, const std::string& hash,
                 std::ostream& out) {
  const INCSystem fin = finite_part(sys, p.max_n);
  const std::vector<SpectrumRow> rows = spectrum_curve(fin, tabulate(p.potentials[0], fin), p.alphas, p.level, p.opt);
  Artifact csv(flags, p.output, hash);
  csv.stream() << "alpha,m,trunc_size,dim_lower,dim_upper,kkt_residual,feasible,iterations,seconds\n";
  const std::string size = std::to_string(fin.digits().size());
  std::size_t feasible = 0;
  bool converged = true;
  for (const SpectrumRow& row : rows) {
    std::vector<std::string> cells = {fmt17(row.alpha), "inf", size};
    if (row.feasible) {
      const OptResult& r = *row.result;
      ++feasible;
      converged = converged && r.converged;
      cells.insert(cells.end(), {fmt17(r.dimension.lower), fmt17(r.dimension.upper), fmt17(r.kkt_residual), "1",
                                 std::to_string(r.iterations), fmt17(seconds_of(r, flags))});
    } else {
      cells.insert(cells.end(), {"", "", "", "0", "", ""});
    }
    csv.stream() << join(cells) << '\n';
  }
  out << "points=" << rows.size() << " feasible=" << feasible << '\n';
  if (feasible == 0) return kExitInfeasible;
  return converged ? kExitOk : kExitNotConverged;
}

int run_levelset(const Plan& p, const INCSystem& sys, const Flags& flags, const std::string& hash,
                 std::ostream& out, std::ostream& err) {
  SpectrumRequest req{sys, {}, p.targets, p.m_schedule, {}, p.level, p.opt};
  for (long n : p.truncations) req.truncations.push_back(truncation_by_index(sys, n));
  const long widest = *std::max_element(p.truncations.begin(), p.truncations.end());
  const INCSystem largest = truncate(sys, truncation_by_index(sys, widest));
  for (const Potential& phi : p.potentials) req.potentials.push_back(tabulate(phi, largest));

  std::vector<const LevelSetStage*> order;
  LevelSetGrid grid;
  LevelSetReport report;
  if (p.grid) {
    grid = level_set_grid(req);
    for (std::size_t j = 0; j < grid.trunc_sizes.size(); ++j) {
      for (std::size_t i = 0; i < grid.m_values.size(); ++i) order.push_back(&grid.cells[i][j]);
    }
  } else {
    report = level_set_dim(req);
    for (const LevelSetStage& st : report.stages) order.push_back(&st);
  }

  Artifact csv(flags, p.output, hash);
  std::vector<std::string> header;
  if (p.targets.size() == 1) {
    header.push_back("alpha");
  } else {
    for (std::size_t k = 0; k < p.targets.size(); ++k) header.push_back("alpha_" + std::to_string(k + 1));
  }
  for (const char* h : {"m", "trunc_size", "dim_lower", "dim_upper", "kkt_residual", "feasible", "iterations", "seconds"}) {
    header.push_back(h);
  }
  csv.stream() << join(header) << '\n';
  std::size_t feasible = 0;
  bool converged = true;
  for (const LevelSetStage* st : order) {
    std::vector<std::string> cells;
    for (double a : p.targets) cells.push_back(fmt17(a));
    cells.push_back(std::to_string(st->m));
    cells.push_back(std::to_string(st->trunc_size));
    if (st->feasible) {
      const OptResult& r = *st->result;
      ++feasible;
      converged = converged && r.converged;
      cells.insert(cells.end(), {fmt17(r.dimension.lower), fmt17(r.dimension.upper), fmt17(r.kkt_residual), "1",
                                 std::to_string(r.iterations), fmt17(seconds_of(r, flags))});
    } else {
      cells.insert(cells.end(), {"", "", "", "0", "", ""});
      err << "m=" << st->m << " trunc_size=" << st->trunc_size << " infeasible: " << st->note << '\n';
    }
    csv.stream() << join(cells) << '\n';
  }
  if (feasible == 0) {
    out << "empty=true\n";
    return kExitInfeasible;
  }
  if (p.grid) {
    bool down_m = true;
    bool up_n = true;
    for (std::size_t i = 0; i < grid.m_values.size(); ++i) {
      for (std::size_t j = 0; j < grid.trunc_sizes.size(); ++j) {
        const LevelSetStage& c = grid.cells[i][j];
        if (!c.feasible) continue;
        if (i > 0 && grid.cells[i - 1][j].feasible &&
            c.result->dimension.upper > grid.cells[i - 1][j].result->dimension.upper + 1e-6) {
          down_m = false;
        }
        if (j > 0 && grid.cells[i][j - 1].feasible &&
            c.result->dimension.upper < grid.cells[i][j - 1].result->dimension.upper - 1e-6) {
          up_n = false;
        }
      }
    }
    const LevelSetStage& last = grid.cells.back().back();
    if (last.feasible) print_dim(out, last.result->dimension);
    out << "nonincreasing_in_m=" << (down_m ? "true" : "false")
        << " nondecreasing_in_truncation=" << (up_n ? "true" : "false") << '\n';
  } else {
    out << "limit=" << fmt17(report.limit) << " trend=" << fmt17(report.trend)
        << " richardson=" << fmt17(report.richardson)
        << " nonincreasing=" << (report.nonincreasing ? "true" : "false") << '\n';
  }
  return converged ? kExitOk : kExitNotConverged;
}

int run_render(const Plan& p, const INCSystem& sys, const Flags& flags, const std::string& hash, std::ostream& out,
               std::ostream& err) {
  const CoverSet cover = render_cover(finite_part(sys, p.max_n), p.target_width, p.cap);
  Artifact file(flags, p.output, hash);
  write_rectangles(file.stream(), cover.rectangles);
  if (!cover.complete) err << "rectangle cap reached; the cover is partial\n";
  out << "rectangles=" << cover.rectangles.size() << " depth=" << cover.depth
      << " complete=" << (cover.complete ? "true" : "false") << '\n';
  return kExitOk;
}

int run_boxdim(const Plan& p, const INCSystem& sys, const Flags& flags, const std::string& hash, std::ostream& out) {
  const CoverSet cover = render_cover(finite_part(sys, p.max_n), p.target_width, p.cap);
  const BoxDimension d = estimate_dimension(cover, p.scales);
  Artifact csv(flags, p.output, hash);
  csv.stream() << "# slope=" << fmt17(d.slope) << " stderr=" << fmt17(d.std_error) << '\n';
  std::string fitted;
  for (const ScaleCount& s : d.counts) {
    if (!s.used) continue;
    if (!fitted.empty()) fitted += ' ';
    fitted += fmt17(s.epsilon);
  }
  csv.stream() << "# fitted_scales=" << fitted << '\n';
  csv.stream() << "epsilon,count\n";
  for (const ScaleCount& s : d.counts) csv.stream() << fmt17(s.epsilon) << ',' << s.count << '\n';
  out << "slope=" << fmt17(d.slope) << " stderr=" << fmt17(d.std_error) << '\n';
  return kExitOk;
}

void print_report(const ValidationReport& rep, std::ostream& out) {
  for (const Finding& f : rep.entries) {
    out << f.check << ' ' << to_string(f.status);
    if (!f.witness.empty()) out << ' ' << f.witness;
    out << '\n';
  }
  if (rep.ucc_horizon) out << "ucc_horizon=" << *rep.ucc_horizon << '\n';
  if (!rep.dominance_violations.empty()) {
    out << "dominance_violations=";
    for (std::size_t k = 0; k < rep.dominance_violations.size(); ++k) {
      out << (k ? " " : "") << to_string(rep.dominance_violations[k]);
    }
    out << '\n';
  }
}

// --- presets ----------------------------------------------------------------

const std::map<std::string, const char*>& preset_table() {
  static const std::map<std::string, const char*> table = {
      {"escape_of_mass", R"({
  "description": "Level set where every continued-fraction digit has frequency zero, D = {(n, n mod 2)}",
  "system": {"builtin": "gauss_renyi", "digits": "n_mod_2", "max_n": 1024},
  "command": "levelset",
  "allow_warn": true,
  "params": {
    "potentials": [{"kind": "digit_indicators", "count": 16}],
    "targets": [0],
    "m_schedule": [2, 4, 8, 16],
    "truncations": [16, 64, 256, 1024],
    "mode": "grid",
    "starts": 16,
    "seed": 0,
    "output": "escape_of_mass.csv"
  }
})"},
      {"geometric_mean", R"({
  "description": "Geometric mean of the continued-fraction digits equal to 3 and binary digit mean 1/2",
  "system": {"builtin": "gauss_renyi", "digits": "all", "max_n": 32},
  "command": "levelset",
  "exclude_violations": true,
  "params": {
    "potentials": ["log_digit", "vertical_digit"],
    "targets": [1.0986122886681098, 0.5],
    "m_schedule": [2, 4, 8, 16],
    "truncations": [8, 16, 32],
    "mode": "grid",
    "starts": 8,
    "seed": 0,
    "output": "geometric_mean.csv"
  }
})"},
      {"arithmetic_mean", R"({
  "description": "Arithmetic mean of the continued-fraction digits equal to 4 and binary digit mean 1/2",
  "system": {"builtin": "gauss_renyi", "digits": "all", "max_n": 32},
  "command": "levelset",
  "exclude_violations": true,
  "params": {
    "potentials": ["digit_value", "vertical_digit"],
    "targets": [4, 0.5],
    "m_schedule": [2, 4, 8, 16],
    "truncations": [8, 16, 32],
    "mode": "grid",
    "starts": 8,
    "seed": 0,
    "output": "arithmetic_mean.csv"
  }
})"},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : preset_table()) out.push_back(name);
  return out;
}

json preset(const std::string& name) {
  const auto it = preset_table().find(name);
  if (it == preset_table().end()) throw SchemaError("", "unknown preset \"" + name + "\"");
  return json::parse(it->second);
}

json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
}

INCSystem build_system(const json& system) { return parse_system(system, "/system"); }

RunConfig parse_config(const json& doc) {
  require_object(doc, "");
  check_keys(doc, "", {"system", "command", "params", "allow_warn", "exclude_violations", "description"});
  RunConfig cfg;
  cfg.system = require(doc, "system", "");
  cfg.command = as_string(require(doc, "command", ""), "/command");
  if (kCommands.count(cfg.command) == 0) {
    throw SchemaError("/command", "expected one of dim, sweep, spectrum, levelset, render, boxdim, validate");
  }
  cfg.params = find(doc, "params") ? doc["params"] : json::object();
  if (const json* v = find(doc, "allow_warn")) cfg.allow_warn = as_bool(*v, "/allow_warn");
  if (const json* v = find(doc, "exclude_violations")) cfg.exclude_violations = as_bool(*v, "/exclude_violations");
  if (const json* v = find(doc, "description")) as_string(*v, "/description");
  const Plan plan = parse_plan(cfg.command, cfg.params);
  cfg.seed = plan.opt.seed;
  build_system(cfg.system);
  return cfg;
}

std::string config_hash(const RunConfig& cfg, const Flags& flags) {
  const json canonical = {
      {"system", cfg.system},
      {"command", cfg.command},
      {"params", cfg.params},
      {"seed", flags.seed.value_or(cfg.seed)},
      {"allow_warn", cfg.allow_warn || flags.allow_warn},
      {"exclude_violations", cfg.exclude_violations || flags.exclude_violations},
  };
  return hex64(fnv1a(canonical.dump()));
}

int run(const RunConfig& cfg, const Flags& flags, std::ostream& out, std::ostream& err) {
  try {
    Plan plan = parse_plan(cfg.command, cfg.params);
    plan.opt.seed = flags.seed.value_or(cfg.seed);
    if (flags.threads) plan.opt.threads = *flags.threads;
    const bool allow_warn = cfg.allow_warn || flags.allow_warn;
    const bool exclude = cfg.exclude_violations || flags.exclude_violations;
    const std::string hash = config_hash(cfg, flags);

    INCSystem sys = build_system(cfg.system);
    const ValidationReport report = validate(sys, plan.vopts);
    if (plan.command == "validate") {
      print_report(report, out);
      if (report.has(CheckStatus::fail)) return kExitValidation;
      if (report.has(CheckStatus::warn) && !allow_warn) return kExitValidation;
      return kExitOk;
    }
    if (report.has(CheckStatus::fail)) {
      print_report(report, err);
      err << "validation failed\n";
      return kExitValidation;
    }
    if (report.has(CheckStatus::warn)) {
      if (exclude) {
        sys = exclude_violations(sys, report);
        err << "excluded " << report.dominance_violations.size() << " digits violating dominance\n";
      } else if (allow_warn) {
        print_report(report, err);
        err << "continuing with validation warnings\n";
      } else {
        print_report(report, err);
        err << "validation warnings; pass --allow-warn or --exclude-violations\n";
        return kExitValidation;
      }
    }

    if (plan.command == "dim") return run_dim(plan, sys, flags, hash, out);
    if (plan.command == "sweep") return run_sweep(plan, sys, flags, hash, out);
    if (plan.command == "spectrum") return run_spectrum(plan, sys, flags, hash, out);
    if (plan.command == "levelset") return run_levelset(plan, sys, flags, hash, out, err);
    if (plan.command == "render") return run_render(plan, sys, flags, hash, out, err);
    return run_boxdim(plan, sys, flags, hash, out);
  } catch (const SchemaError& e) {
    err << "schema error at " << (e.pointer().empty() ? "/" : e.pointer()) << ": " << e.what() << '\n';
    return kExitSchema;
  } catch (const InfeasibleError& e) {
    err << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSchema;
  }
}

}  // namespace incdim::cli
