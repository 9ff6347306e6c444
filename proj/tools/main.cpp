#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "confdiff/error.hpp"

namespace {

using namespace confdiff;
using namespace confdiff::cli;

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  auto* config = cmd->add_option("--config", opts.config_path, "Experiment config (JSON)");
  auto* preset = cmd->add_option("--preset", opts.preset, "Built-in config preset")
                     ->check(CLI::IsMember(preset_names()));
  config->excludes(preset);
  cmd->add_option("--out", opts.out, "Output directory (overrides output.dir)");
  cmd->add_option("--seed", opts.seed, "Top-level seed (overrides the config)");
  cmd->add_option("--jobs", opts.jobs, "Worker threads")->envname("CONFDIFF_JOBS")->check(CLI::PositiveNumber);
}

ExperimentConfig load(const CommonOptions& opts) {
  if (opts.config_path.empty() && opts.preset.empty()) throw UsageError("one of --config or --preset is required");
  ExperimentConfig cfg = opts.preset.empty() ? load_experiment_config(opts.config_path)
                                             : parse_experiment_config(preset_json(opts.preset));
  if (opts.seed) cfg.seed = *opts.seed;
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary classification from confidence-difference pairs"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string data_dir;
  std::string suite;

  auto* generate = app.add_subcommand("generate", "Sample ConfDiff, Pcomp and labeled datasets");
  add_common(generate, opts);
  auto* train = app.add_subcommand("train", "Train one estimator over the configured seeds");
  add_common(train, opts);
  train->add_option("--data", data_dir, "Read datasets written by 'generate' instead of sampling inline");
  auto* verify = app.add_subcommand("verify", "Run a Monte-Carlo verification suite");
  add_common(verify, opts);
  verify->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(verify_suites()));
  auto* sweep = app.add_subcommand("sweep", "Cross-product training runs along one axis");
  add_common(sweep, opts);
  auto* presets = app.add_subcommand("presets", "Print a built-in preset");
  std::string preset_name;
  presets->add_option("name", preset_name, "Preset")->check(CLI::IsMember(preset_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (presets->parsed()) {
      if (preset_name.empty()) {
        for (const auto& name : preset_names()) std::cout << name << '\n';
      } else {
        std::cout << preset_json(preset_name);
      }
      return kOk;
    }
    const ExperimentConfig cfg = load(opts);
    if (generate->parsed()) return cmd_generate(cfg, cfg.output_dir, std::cout);
    if (train->parsed()) return cmd_train(cfg, cfg.output_dir, data_dir, opts.jobs, std::cout);
    if (verify->parsed()) return cmd_verify(suite, cfg, cfg.output_dir, opts.jobs, std::cout);
    if (sweep->parsed()) return cmd_sweep(cfg, cfg.output_dir, opts.jobs, std::cout);
  } catch (const AbortedRun& e) {
    std::cerr << "aborted at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kAborted;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAborted;
  }
  return kUsage;
}
