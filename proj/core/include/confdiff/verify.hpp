#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "confdiff/data_synth.hpp"
#include "confdiff/loss.hpp"
#include "confdiff/model.hpp"
#include "confdiff/rng.hpp"
#include "confdiff/trainer.hpp"

namespace confdiff {

/// Monte-Carlo comparison of an estimate against a reference value.
/// z_score = (estimate - reference) / sqrt(std_error^2 + reference_std_error^2),
/// which reduces to (estimate - reference) / std_error for an exact reference.
struct MCReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  double reference_std_error = 0.0;
  double z_score = 0.0;
  std::size_t trials = 0;
};

double z_score(double estimate, double std_error, double reference, double reference_std_error);

/// R(g) over `draws` fresh labeled samples.
MonteCarloEstimate true_risk(const GaussianMixtureSpec& spec, const ModelParams& params, LossKind loss,
                             Rng& rng, std::size_t draws = 1'000'000);

struct EstimatorChoice {
  enum class Kind { unbiased, weighted, corrected };
  Kind kind = Kind::unbiased;
  double alpha = 0.5;
  CorrectionKind correction = CorrectionKind::identity;

  static EstimatorChoice unbiased() { return {}; }
  static EstimatorChoice weighted(double alpha) { return {Kind::weighted, alpha, CorrectionKind::identity}; }
  static EstimatorChoice corrected(CorrectionKind f) { return {Kind::corrected, 0.5, f}; }

  std::string describe() const;
};

/// Mean of the chosen ConfDiff estimator over `trials` independent datasets
/// of `n` pairs, compared against true_risk.
MCReport mc_estimator_mean(const GaussianMixtureSpec& spec, const ModelParams& params, LossKind loss,
                           EstimatorChoice estimator, std::size_t n, std::size_t trials, Rng& rng,
                           std::size_t reference_draws = 1'000'000, std::size_t jobs = 1);

/// The four pair-expectation identities behind unbiasedness:
///   E[(pi+ - c) l(g(x),  +1)] = pi+ E+[l(g(x), +1)]
///   E[(pi- + c) l(g(x),  -1)] = pi- E-[l(g(x), -1)]
///   E[(pi+ + c) l(g(x'), +1)] = pi+ E+[l(g(x'), +1)]
///   E[(pi- - c) l(g(x'), -1)] = pi- E-[l(g(x'), -1)]
/// Left sides come from ConfDiff pairs; right sides from label-conditioned
/// draws (rejection on labels of joint samples).
std::array<MCReport, 4> check_lemma4(const GaussianMixtureSpec& spec, const ModelParams& params, LossKind loss,
                                     std::size_t trials, std::size_t n, Rng& rng);

struct VarianceProfile {
  std::vector<double> alphas;
  std::vector<double> variances;
  std::vector<double> means;
  double quadratic_coefficient = 0.0;  // least-squares fit of Var(alpha) on (alpha - 1/2)^2
  double quadratic_intercept = 0.0;
  double half_column_max_abs_diff = 0.0;  // alpha = 0.5 column vs the unbiased estimator
  std::size_t samples = 0;
};

/// Sample variance of the alpha-weighted estimator per alpha, with common
/// random numbers: every alpha is evaluated on the same datasets. Each
/// generated dataset is also evaluated with its pair roles swapped
/// ((x, x', c) -> (x', x, -c)), which has the same distribution, so the
/// sample holds 2 * trials values per alpha.
VarianceProfile variance_profile(const GaussianMixtureSpec& spec, const ModelParams& params, LossKind loss,
                                 const std::vector<double>& alpha_grid, std::size_t n, std::size_t trials,
                                 Rng& rng);

struct ConvergencePoint {
  std::size_t n = 0;
  double mean_excess_risk = 0.0;
  double std_error = 0.0;  // across seeds
  std::vector<double> per_seed;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  double bayes_error = 0.0;  // 1 - Bayes accuracy on the evaluation sample
  double slope = 0.0;        // least-squares slope of log(mean excess) on log(n)
};

struct StudyOptions {
  std::size_t seeds = 5;
  std::size_t test_size = 2000;
  std::size_t eval_draws = 1'000'000;
  std::size_t jobs = 1;
};

/// Trains on fresh ConfDiff datasets for every n and seed and reports excess
/// zero-one risk over the Bayes classifier. Model and Bayes errors are
/// measured on one shared evaluation sample, so their difference is paired.
ConvergenceReport convergence_study(const GaussianMixtureSpec& spec, const std::vector<std::size_t>& n_grid,
                                    const TrainConfig& base, const StudyOptions& options);

struct NoiseCell {
  double prior_scale = 1.0;
  double conf_noise_std = 0.0;
};

struct RobustnessCell {
  NoiseCell noise;
  double mean_accuracy = 0.0;
  double std_dev = 0.0;    // across seeds
  double std_error = 0.0;  // std_dev / sqrt(seeds)
  double mean_abs_confidence_error = 0.0;  // sum |c_noisy - c| / n, averaged over seeds
  double prior_error = 0.0;                // |corrupted prior - prior|
  std::vector<double> accuracies;
};

struct RobustnessReport {
  std::vector<RobustnessCell> cells;
  // The clean cell reproduced plain training bit for bit on every seed.
  bool clean_passthrough_exact = false;
};

/// Final accuracy per (prior_scale, conf_noise_std) cell, trained on
/// corrupted confidences and prior. The grid must contain the clean cell.
RobustnessReport robustness_study(const GaussianMixtureSpec& spec, const std::vector<NoiseCell>& grid,
                                  const TrainConfig& base, std::size_t n_pairs, const StudyOptions& options);

/// Least-squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace confdiff
