#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "confdiff/model.hpp"
#include "confdiff/optimizer.hpp"
#include "confdiff/types.hpp"

namespace confdiff {

enum class EstimatorKind {
  confdiff_unbiased,
  confdiff_relu,
  confdiff_abs,
  pcomp_unbiased,
  soft_label,
  supervised_hard,
};

std::string_view to_string(EstimatorKind kind) noexcept;
EstimatorKind parse_estimator_kind(std::string_view name);
bool uses_confdiff_data(EstimatorKind kind) noexcept;

struct TrainConfig {
  EstimatorKind estimator = EstimatorKind::confdiff_abs;
  std::size_t epochs = 200;
  std::size_t batch_pairs = 256;
  OptimizerConfig optimizer;
  ModelSpec model;  // input_dim 0 means "take it from the data"
  std::uint64_t seed = 0;
  std::size_t eval_tail_epochs = 10;
  // Pair weighting for confdiff_unbiased; 0.5 is the symmetric estimator.
  double alpha = 0.5;

  void validate() const;
};

using TrainingData = std::variant<ConfDiffDataset, PcompDataset, std::vector<SoftLabeledExample>,
                                  std::vector<LabeledExample>>;

/// Throws ConfigError unless the estimator can consume this kind of data.
void check_compatible(EstimatorKind estimator, const TrainingData& data);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_risk = 0.0;  // full training set, configured estimator
  double test_accuracy = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct RunResult {
  std::vector<EpochRecord> epochs;
  double final_accuracy = 0.0;  // mean test accuracy over the last eval_tail_epochs
  double min_train_risk = 0.0;
  ModelParams params;           // parameters after the last epoch

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Minibatch empirical risk minimization. Pairs are reshuffled each epoch
/// from the run seed; the last partial batch is kept; risk correction is
/// applied per minibatch. The model is initialized from a stream derived
/// from config.seed (config.model.init_seed is ignored).
RunResult train(const TrainingData& data, std::span<const LabeledExample> test,
                const TrainConfig& config);

/// Fraction of examples with sign(g(x)) == y, sign(0) taken as +1.
double evaluate_accuracy(const ModelParams& params, std::span<const LabeledExample> test);

/// Configured estimator over the whole training set.
double training_risk(const TrainingData& data, const ModelParams& params, const TrainConfig& config);

}  // namespace confdiff
