#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "confdiff/config.hpp"
#include "confdiff/data_synth.hpp"
#include "confdiff/trainer.hpp"

namespace confdiff::cli {

enum ExitCode : int { kOk = 0, kAssertionFailed = 1, kUsage = 2, kAborted = 3 };

// Raised for bad paths and arguments; maps to kUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything sampled for one replicate (one seed) of an experiment. The
// pointwise baselines get 2n examples so they see as many inputs as the
// pair-based estimators.
struct Replicate {
  ConfDiffDataset confdiff;
  PcompDataset pcomp;
  std::vector<LabeledExample> labeled;
  std::vector<SoftLabeledExample> soft;
  std::vector<LabeledExample> test;
  double mean_abs_confidence_error = 0.0;
};

Replicate make_replicate(const ExperimentConfig& config, const GaussianMixtureSpec& spec, std::size_t n_pairs,
                         const NoiseSpec& noise, std::size_t replicate);

TrainingData training_data_for(EstimatorKind estimator, const Replicate& replicate);

// Run seed for replicate s; shared by train and sweep.
std::uint64_t run_seed(const ExperimentConfig& config, std::size_t replicate);

int cmd_generate(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_train(const ExperimentConfig& config, const std::string& out_dir, const std::string& data_dir,
              std::size_t jobs, std::ostream& log);
int cmd_verify(const std::string& suite, const ExperimentConfig& config, const std::string& out_dir,
               std::size_t jobs, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, const std::string& out_dir, std::size_t jobs, std::ostream& log);

const std::vector<std::string>& verify_suites();

}  // namespace confdiff::cli
