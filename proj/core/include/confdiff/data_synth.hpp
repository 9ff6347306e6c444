#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "confdiff/rng.hpp"
#include "confdiff/types.hpp"

namespace confdiff {

/// Two-component Gaussian mixture with diagonal covariances. Posteriors, and
/// therefore confidence differences and the Bayes classifier, are exact.
struct GaussianMixtureSpec {
  std::size_t dim = 0;
  Vector mean_pos;
  Vector mean_neg;
  Vector cov_diag_pos;
  Vector cov_diag_neg;
  double prior_pos = 0.5;

  double prior_neg() const noexcept { return 1.0 - prior_pos; }

  // Throws InvalidInput if shapes disagree, a variance is not strictly
  // positive, or prior_pos is outside (0, 1).
  void validate() const;

  /// Shared isotropic covariance `variance * I` for both classes.
  static GaussianMixtureSpec isotropic(Vector mean_pos, Vector mean_neg, double variance,
                                       double prior_pos);

  friend bool operator==(const GaussianMixtureSpec&, const GaussianMixtureSpec&) = default;
};

/// Corruptions applied to the learner's view: prior becomes prior_scale * pi+,
/// each c becomes eps_i * c with eps_i ~ N(1, conf_noise_std^2).
struct NoiseSpec {
  double prior_scale = 1.0;
  double conf_noise_std = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool is_clean() const noexcept { return prior_scale == 1.0 && conf_noise_std == 0.0; }
};

/// log p(x | y) for the class-conditional Gaussian.
double class_log_density(const GaussianMixtureSpec& spec, Label y, std::span<const double> x);

/// p(y = +1 | x) by Bayes rule, evaluated in log space.
double posterior_positive(const GaussianMixtureSpec& spec, std::span<const double> x);

/// c(x, x') = p(+1 | x') - p(+1 | x).
double confidence_difference(const GaussianMixtureSpec& spec, std::span<const double> x,
                             std::span<const double> x_prime);

/// Draw a class by the prior, then a point from that class.
LabeledExample sample_labeled(const GaussianMixtureSpec& spec, Rng& rng);

/// Draw a point from the class-conditional density p(x | y).
Vector sample_class_conditional(const GaussianMixtureSpec& spec, Label y, Rng& rng);

/// Two independent draws from the marginal p(x); labels are discarded.
std::pair<Vector, Vector> sample_unlabeled_pair(const GaussianMixtureSpec& spec, Rng& rng);

ConfDiffDataset make_confdiff_dataset(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng);

std::vector<LabeledExample> make_labeled_dataset(const GaussianMixtureSpec& spec, std::size_t m,
                                                 Rng& rng);

/// Marginal draws carrying their exact positive-class posterior as soft label.
std::vector<SoftLabeledExample> make_soft_labeled_dataset(const GaussianMixtureSpec& spec,
                                                          std::size_t m, Rng& rng);

struct PcompSamplingStats {
  std::size_t drawn = 0;
  std::size_t reversed = 0;  // (-1, +1) pairs flipped into (+1, -1) order
};

/// Pairwise-comparison pairs: labeled pairs are drawn iid, (-1, +1) pairs are
/// reversed, then labels are dropped.
PcompDataset make_pcomp_dataset(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng,
                                PcompSamplingStats* stats = nullptr);

ConfDiffDataset corrupt_confidences(const ConfDiffDataset& data, const NoiseSpec& noise, Rng& rng);

/// clamp(prior_scale * prior, 1e-3, 1 - 1e-3).
double corrupt_prior(double prior, const NoiseSpec& noise);

/// Mean |c_noisy - c_clean| over aligned datasets.
double mean_abs_confidence_error(const ConfDiffDataset& clean, const ConfDiffDataset& noisy);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Accuracy of sign(p(+1|x) - 1/2) estimated over `draws` labeled samples.
MonteCarloEstimate bayes_accuracy(const GaussianMixtureSpec& spec, Rng& rng,
                                  std::size_t draws = 1'000'000);

/// Label the Bayes classifier assigns to x (ties go to +1).
Label bayes_decision(const GaussianMixtureSpec& spec, std::span<const double> x);

}  // namespace confdiff
