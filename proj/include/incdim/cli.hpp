#pragma once

// Batch front end: JSON run configs, presets, subcommand dispatch and CSV output.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "incdim/ifs.hpp"

namespace incdim::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitSchema = 1,
  kExitValidation = 2,
  kExitInfeasible = 3,
  kExitNotConverged = 4,
};

/// A config document that does not match the schema; `pointer` locates the
/// offending value ("/params/m_schedule/2").
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& message)
      : Error(message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// Command-line overrides; unset fields fall back to the document.
struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir = ".";
  bool reproducible = false;
  bool allow_warn = false;
  bool exclude_violations = false;
};

struct RunConfig {
  nlohmann::json system;
  std::string command;
  nlohmann::json params;
  std::uint64_t seed = 0;
  bool allow_warn = false;
  bool exclude_violations = false;
};

/// Checks the whole document (system, command and its parameters) and
/// throws SchemaError on the first violation.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads a JSON file; syntax errors become SchemaError at "".
nlohmann::json load_document(const std::string& path);

std::vector<std::string> preset_names();
/// Built-in config documents; throws SchemaError for unknown names.
nlohmann::json preset(const std::string& name);

/// Builds the system named by a parsed config.
INCSystem build_system(const nlohmann::json& system);

/// Hash of the effective config (seed and switches included, threads not).
std::string config_hash(const RunConfig& cfg, const Flags& flags);

/// Runs one command, writing artifacts under flags.out_dir and the summary
/// to `out`; diagnostics go to `err`. Returns an ExitCode.
int run(const RunConfig& cfg, const Flags& flags, std::ostream& out, std::ostream& err);

}  // namespace incdim::cli
