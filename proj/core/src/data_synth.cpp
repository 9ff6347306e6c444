#include "confdiff/data_synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "confdiff/error.hpp"
#include "confdiff/loss.hpp"

namespace confdiff {

void GaussianMixtureSpec::validate() const {
  if (dim == 0) throw InvalidInput("mixture dimension must be positive");
  if (mean_pos.size() != dim || mean_neg.size() != dim || cov_diag_pos.size() != dim ||
      cov_diag_neg.size() != dim) {
    throw InvalidInput("mixture parameter vectors must all have length dim");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(cov_diag_pos[k] > 0.0) || !(cov_diag_neg[k] > 0.0)) {
      throw InvalidInput("mixture variances must be strictly positive");
    }
    if (!std::isfinite(mean_pos[k]) || !std::isfinite(mean_neg[k]) || !std::isfinite(cov_diag_pos[k]) ||
        !std::isfinite(cov_diag_neg[k])) {
      throw InvalidInput("mixture parameters must be finite");
    }
  }
  if (!(prior_pos > 0.0 && prior_pos < 1.0)) {
    throw InvalidInput("class prior must lie in (0, 1), got " + std::to_string(prior_pos));
  }
}

GaussianMixtureSpec GaussianMixtureSpec::isotropic(Vector mean_pos, Vector mean_neg, double variance,
                                                   double prior_pos) {
  GaussianMixtureSpec spec;
  spec.dim = mean_pos.size();
  spec.cov_diag_pos.assign(spec.dim, variance);
  spec.cov_diag_neg.assign(spec.dim, variance);
  spec.mean_pos = std::move(mean_pos);
  spec.mean_neg = std::move(mean_neg);
  spec.prior_pos = prior_pos;
  spec.validate();
  return spec;
}

void NoiseSpec::validate() const {
  if (!(prior_scale > 0.0) || !std::isfinite(prior_scale)) throw InvalidInput("prior_scale must be positive");
  if (!(conf_noise_std >= 0.0) || !std::isfinite(conf_noise_std)) {
    throw InvalidInput("conf_noise_std must be nonnegative");
  }
}

namespace {

void check_dim(const GaussianMixtureSpec& spec, std::span<const double> x) {
  if (x.size() != spec.dim) {
    throw InvalidInput("feature vector has dimension " + std::to_string(x.size()) + ", expected " +
                       std::to_string(spec.dim));
  }
}

// log(pi+ p+(x)) - log(pi- p-(x))
double log_odds(const GaussianMixtureSpec& spec, std::span<const double> x) {
  check_dim(spec, x);
  return (std::log(spec.prior_pos) + class_log_density(spec, Label::positive, x)) -
         (std::log(spec.prior_neg()) + class_log_density(spec, Label::negative, x));
}

}  // namespace

double class_log_density(const GaussianMixtureSpec& spec, Label y, std::span<const double> x) {
  check_dim(spec, x);
  const Vector& mean = y == Label::positive ? spec.mean_pos : spec.mean_neg;
  const Vector& var = y == Label::positive ? spec.cov_diag_pos : spec.cov_diag_neg;
  constexpr double log_two_pi = 1.8378770664093454835606594728112;
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.dim; ++k) {
    const double diff = x[k] - mean[k];
    acc += diff * diff / var[k] + std::log(var[k]) + log_two_pi;
  }
  return -0.5 * acc;
}

double posterior_positive(const GaussianMixtureSpec& spec, std::span<const double> x) {
  return sigmoid(log_odds(spec, x));
}

double confidence_difference(const GaussianMixtureSpec& spec, std::span<const double> x,
                             std::span<const double> x_prime) {
  return posterior_positive(spec, x_prime) - posterior_positive(spec, x);
}

Label bayes_decision(const GaussianMixtureSpec& spec, std::span<const double> x) {
  return log_odds(spec, x) >= 0.0 ? Label::positive : Label::negative;
}

Vector sample_class_conditional(const GaussianMixtureSpec& spec, Label y, Rng& rng) {
  const Vector& mean = y == Label::positive ? spec.mean_pos : spec.mean_neg;
  const Vector& var = y == Label::positive ? spec.cov_diag_pos : spec.cov_diag_neg;
  Vector x(spec.dim);
  for (std::size_t k = 0; k < spec.dim; ++k) x[k] = mean[k] + std::sqrt(var[k]) * rng.normal();
  return x;
}

LabeledExample sample_labeled(const GaussianMixtureSpec& spec, Rng& rng) {
  const Label y = rng.bernoulli(spec.prior_pos) ? Label::positive : Label::negative;
  return {sample_class_conditional(spec, y, rng), y};
}

std::pair<Vector, Vector> sample_unlabeled_pair(const GaussianMixtureSpec& spec, Rng& rng) {
  Vector x = sample_labeled(spec, rng).x;
  Vector x_prime = sample_labeled(spec, rng).x;
  return {std::move(x), std::move(x_prime)};
}

ConfDiffDataset make_confdiff_dataset(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n == 0) throw InvalidInput("dataset size must be at least 1");
  ConfDiffDataset data;
  data.class_prior = spec.prior_pos;
  data.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [x, x_prime] = sample_unlabeled_pair(spec, rng);
    const double c = confidence_difference(spec, x, x_prime);
    data.pairs.push_back({std::move(x), std::move(x_prime), c});
  }
  return data;
}

std::vector<LabeledExample> make_labeled_dataset(const GaussianMixtureSpec& spec, std::size_t m,
                                                 Rng& rng) {
  spec.validate();
  if (m == 0) throw InvalidInput("dataset size must be at least 1");
  std::vector<LabeledExample> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(sample_labeled(spec, rng));
  return out;
}

std::vector<SoftLabeledExample> make_soft_labeled_dataset(const GaussianMixtureSpec& spec,
                                                          std::size_t m, Rng& rng) {
  spec.validate();
  if (m == 0) throw InvalidInput("dataset size must be at least 1");
  std::vector<SoftLabeledExample> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Vector x = sample_labeled(spec, rng).x;
    const double r = posterior_positive(spec, x);
    out.push_back({std::move(x), r});
  }
  return out;
}

PcompDataset make_pcomp_dataset(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng,
                                PcompSamplingStats* stats) {
  spec.validate();
  if (n == 0) throw InvalidInput("dataset size must be at least 1");
  PcompDataset data;
  data.class_prior = spec.prior_pos;
  data.pairs.reserve(n);
  PcompSamplingStats local;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledExample first = sample_labeled(spec, rng);
    LabeledExample second = sample_labeled(spec, rng);
    ++local.drawn;
    if (first.y == Label::negative && second.y == Label::positive) {
      std::swap(first, second);
      ++local.reversed;
    }
    data.pairs.push_back({std::move(first.x), std::move(second.x)});
  }
  if (stats != nullptr) *stats = local;
  return data;
}

ConfDiffDataset corrupt_confidences(const ConfDiffDataset& data, const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  ConfDiffDataset out = data;
  if (noise.conf_noise_std == 0.0) return out;
  for (auto& p : out.pairs) {
    const double scale = rng.normal(1.0, noise.conf_noise_std);
    p.c = std::clamp(scale * p.c, -1.0, 1.0);
  }
  return out;
}

double corrupt_prior(double prior, const NoiseSpec& noise) {
  noise.validate();
  if (!(prior > 0.0 && prior < 1.0)) throw InvalidInput("class prior must lie in (0, 1)");
  return std::clamp(noise.prior_scale * prior, 1e-3, 1.0 - 1e-3);
}

double mean_abs_confidence_error(const ConfDiffDataset& clean, const ConfDiffDataset& noisy) {
  if (clean.size() != noisy.size() || clean.empty()) throw InvalidInput("datasets are not aligned");
  double acc = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) acc += std::fabs(noisy.pairs[i].c - clean.pairs[i].c);
  return acc / static_cast<double>(clean.size());
}

MonteCarloEstimate bayes_accuracy(const GaussianMixtureSpec& spec, Rng& rng, std::size_t draws) {
  spec.validate();
  if (draws == 0) throw InvalidInput("need at least one draw");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const LabeledExample e = sample_labeled(spec, rng);
    if (bayes_decision(spec, e.x) == e.y) ++correct;
  }
  const double n = static_cast<double>(draws);
  const double p = static_cast<double>(correct) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace confdiff
