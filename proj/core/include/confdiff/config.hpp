#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confdiff/data_synth.hpp"
#include "confdiff/trainer.hpp"
#include "confdiff/verify.hpp"

namespace confdiff {

struct DataConfig {
  std::size_t n_pairs = 0;
  std::size_t n_test = 0;
};

struct McCheckConfig {
  std::size_t pairs = 0;
  std::size_t trials = 0;
};

struct VerifyConfig {
  ModelSpec model;  // fixed seeded model the estimator checks evaluate
  std::size_t reference_draws = 1'000'000;
  McCheckConfig unbiasedness;
  McCheckConfig lemma4;
  McCheckConfig variance;
  std::vector<double> alphas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::size_t> convergence_n_grid;
  std::size_t convergence_seeds = 0;
  TrainConfig convergence_train;
  std::size_t robustness_pairs = 0;
  std::size_t robustness_seeds = 0;
  std::vector<NoiseCell> robustness_grid;
  TrainConfig robustness_train;
};

enum class SweepAxis { n_fraction, prior, alpha, noise };

std::string_view to_string(SweepAxis axis) noexcept;

struct SweepConfig {
  SweepAxis axis = SweepAxis::n_fraction;
  std::vector<double> values;       // fractions, priors or alphas
  std::vector<NoiseCell> noise_grid;  // noise axis only
  std::vector<EstimatorKind> estimators;
};

/// Everything one CLI invocation needs. Physical quantities (the mixture,
/// its prior, dataset sizes) have no defaults; optimizer and protocol
/// settings do.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  GaussianMixtureSpec distribution;
  DataConfig data;
  TrainConfig train;
  std::size_t train_seeds = 1;
  NoiseSpec noise;
  std::optional<VerifyConfig> verify;
  std::optional<SweepConfig> sweep;
  std::string output_dir = "out";
};

/// Parses and validates a JSON document. Unknown fields, missing required
/// fields and violated invariants raise ConfigError naming the field path.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::string& path);

std::vector<std::string> preset_names();
/// JSON text of a built-in preset; throws ConfigError for unknown names.
std::string preset_json(std::string_view name);

}  // namespace confdiff
