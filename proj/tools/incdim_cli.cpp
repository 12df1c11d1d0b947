#include <iostream>

#include "CLI11.hpp"

#include "incdim/cli.hpp"

namespace cli = incdim::cli;

int main(int argc, char** argv) {
  CLI::App app{"Dimensions and Birkhoff spectra of INC carpets"};
  std::string config_path;
  std::string preset_name;
  std::string print_preset;
  std::uint64_t seed = 0;
  int threads = 0;
  cli::Flags flags;
  bool list_presets = false;

  auto* config_opt = app.add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  auto* preset_opt = app.add_option("--preset", preset_name, "Built-in run config");
  config_opt->excludes(preset_opt);
  auto* seed_opt = app.add_option("--seed", seed, "Random seed for the optimizer starts");
  auto* threads_opt = app.add_option("--threads", threads, "Worker thread cap (0 = hardware)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", flags.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--reproducible", flags.reproducible, "Omit timestamps and timings from artifacts");
  app.add_flag("--allow-warn", flags.allow_warn, "Proceed when validation only warns");
  app.add_flag("--exclude-violations", flags.exclude_violations, "Drop digits that violate dominance");
  app.add_flag("--list-presets", list_presets, "List built-in configs");
  app.add_option("--print-preset", print_preset, "Print a built-in config");
  CLI11_PARSE(app, argc, argv);

  if (list_presets) {
    for (const std::string& name : cli::preset_names()) std::cout << name << '\n';
    return cli::kExitOk;
  }
  try {
    if (!print_preset.empty()) {
      std::cout << cli::preset(print_preset).dump(2) << '\n';
      return cli::kExitOk;
    }
    if (config_path.empty() && preset_name.empty()) {
      std::cerr << "one of --config or --preset is required\n";
      return cli::kExitSchema;
    }
    const nlohmann::json doc = config_path.empty() ? cli::preset(preset_name) : cli::load_document(config_path);
    const cli::RunConfig cfg = cli::parse_config(doc);
    if (*seed_opt) flags.seed = seed;
    if (*threads_opt) flags.threads = threads;
    return cli::run(cfg, flags, std::cout, std::cerr);
  } catch (const cli::SchemaError& e) {
    std::cerr << "schema error at " << (e.pointer().empty() ? "/" : e.pointer()) << ": " << e.what() << '\n';
    return cli::kExitSchema;
  }
}
