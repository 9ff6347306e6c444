#include "confdiff/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "confdiff/error.hpp"
#include "confdiff/parallel.hpp"
#include "confdiff/risk.hpp"

namespace confdiff {

namespace {

// Welford accumulator.
class RunningStats {
 public:
  void add(double v) {
    ++count_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (v - mean_);
  }

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  double std_error() const { return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0; }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

std::vector<PairScores> pair_scores(const ModelParams& params, const ConfDiffDataset& data) {
  std::vector<PairScores> s(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    s[i] = {score(params, data.pairs[i].x), score(params, data.pairs[i].x_prime)};
  }
  return s;
}

void check_trials(std::size_t trials, std::size_t minimum) {
  if (trials < minimum) throw InvalidInput("need at least " + std::to_string(minimum) + " trials");
}

}  // namespace

double z_score(double estimate, double std_error, double reference, double reference_std_error) {
  const double se = std::sqrt(std_error * std_error + reference_std_error * reference_std_error);
  if (se > 0.0) return (estimate - reference) / se;
  return estimate == reference ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), estimate - reference);
}

MonteCarloEstimate true_risk(const GaussianMixtureSpec& spec, const ModelParams& params, LossKind loss_kind,
                             Rng& rng, std::size_t draws) {
  spec.validate();
  if (draws == 0) throw InvalidInput("need at least one draw");
  RunningStats stats;
  for (std::size_t i = 0; i < draws; ++i) {
    const LabeledExample e = sample_labeled(spec, rng);
    stats.add(loss(loss_kind, score(params, e.x), e.y));
  }
  return {stats.mean(), stats.std_error()};
}

std::string EstimatorChoice::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::unbiased: out << "confdiff_unbiased"; break;
    case Kind::weighted: out << "confdiff_weighted(alpha=" << alpha << ")"; break;
    case Kind::corrected: out << "confdiff_corrected(" << to_string(correction) << ")"; break;
  }
  return out.str();
}

MCReport mc_estimator_mean(const GaussianMixtureSpec& spec, const ModelParams& params, LossKind loss_kind,
                           EstimatorChoice estimator, std::size_t n, std::size_t trials, Rng& rng,
                           std::size_t reference_draws, std::size_t jobs) {
  check_trials(trials, 100);
  std::vector<double> values(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    Rng trial_rng = rng.split(t);
    const ConfDiffDataset data = make_confdiff_dataset(spec, n, trial_rng);
    const auto s = pair_scores(params, data);
    switch (estimator.kind) {
      case EstimatorChoice::Kind::unbiased: values[t] = confdiff_unbiased_risk(data, s, loss_kind); break;
      case EstimatorChoice::Kind::weighted:
        values[t] = confdiff_weighted_risk(data, s, loss_kind, estimator.alpha);
        break;
      case EstimatorChoice::Kind::corrected:
        values[t] = confdiff_corrected_risk(data, s, loss_kind, estimator.correction);
        break;
    }
  });
  RunningStats stats;
  for (double v : values) stats.add(v);

  Rng reference_rng = rng.split("reference");
  const MonteCarloEstimate reference = true_risk(spec, params, loss_kind, reference_rng, reference_draws);

  MCReport report;
  report.name = estimator.describe();
  report.estimate = stats.mean();
  report.std_error = stats.std_error();
  report.reference = reference.estimate;
  report.reference_std_error = reference.std_error;
  report.z_score = z_score(report.estimate, report.std_error, report.reference, report.reference_std_error);
  report.trials = trials;
  return report;
}

std::array<MCReport, 4> check_lemma4(const GaussianMixtureSpec& spec, const ModelParams& params, LossKind loss_kind,
                                     std::size_t trials, std::size_t n, Rng& rng) {
  check_trials(trials, 100);
  spec.validate();
  const double pos = spec.prior_pos;
  const double neg = spec.prior_neg();

  std::array<RunningStats, 4> left;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng trial_rng = rng.split(t);
    const ConfDiffDataset data = make_confdiff_dataset(spec, n, trial_rng);
    std::array<double, 4> sums{};
    for (const auto& p : data.pairs) {
      const double gx = score(params, p.x);
      const double gxp = score(params, p.x_prime);
      sums[0] += (pos - p.c) * loss(loss_kind, gx, Label::positive);
      sums[1] += (neg + p.c) * loss(loss_kind, gx, Label::negative);
      sums[2] += (pos + p.c) * loss(loss_kind, gxp, Label::positive);
      sums[3] += (neg - p.c) * loss(loss_kind, gxp, Label::negative);
    }
    for (std::size_t k = 0; k < 4; ++k) left[k].add(sums[k] / static_cast<double>(n));
  }

  // Class-conditional expectations by rejection: draw from the joint and keep
  // draws whose label matches. One joint stream serves the x slot (identities
  // 1 and 2), an independent one the x' slot (identities 3 and 4).
  const std::size_t draws = trials * n;
  auto conditional = [&](std::string_view stream) {
    Rng draw_rng = rng.split(stream);
    std::array<RunningStats, 2> per_class;  // [0]: l(g,+1) over positives, [1]: l(g,-1) over negatives
    for (std::size_t i = 0; i < draws; ++i) {
      const LabeledExample e = sample_labeled(spec, draw_rng);
      const double g = score(params, e.x);
      if (e.y == Label::positive) {
        per_class[0].add(loss(loss_kind, g, Label::positive));
      } else {
        per_class[1].add(loss(loss_kind, g, Label::negative));
      }
    }
    return per_class;
  };
  const auto first_slot = conditional("rhs-x");
  const auto second_slot = conditional("rhs-x-prime");

  const std::array<std::pair<double, const RunningStats*>, 4> right{{
      {pos, &first_slot[0]},
      {neg, &first_slot[1]},
      {pos, &second_slot[0]},
      {neg, &second_slot[1]},
  }};
  static constexpr std::array<const char*, 4> names{
      "E[(pi+ - c) l(g(x),+1)] = pi+ E+[l(g(x),+1)]",
      "E[(pi- + c) l(g(x),-1)] = pi- E-[l(g(x),-1)]",
      "E[(pi+ + c) l(g(x'),+1)] = pi+ E+[l(g(x'),+1)]",
      "E[(pi- - c) l(g(x'),-1)] = pi- E-[l(g(x'),-1)]",
  };

  std::array<MCReport, 4> reports;
  for (std::size_t k = 0; k < 4; ++k) {
    MCReport& r = reports[k];
    r.name = names[k];
    r.estimate = left[k].mean();
    r.std_error = left[k].std_error();
    r.reference = right[k].first * right[k].second->mean();
    r.reference_std_error = right[k].first * right[k].second->std_error();
    r.z_score = z_score(r.estimate, r.std_error, r.reference, r.reference_std_error);
    r.trials = trials;
  }
  return reports;
}

VarianceProfile variance_profile(const GaussianMixtureSpec& spec, const ModelParams& params, LossKind loss_kind,
                                 const std::vector<double>& alpha_grid, std::size_t n, std::size_t trials,
                                 Rng& rng) {
  check_trials(trials, 1000);
  if (std::find(alpha_grid.begin(), alpha_grid.end(), 0.5) == alpha_grid.end()) {
    throw InvalidInput("alpha grid must contain 0.5");
  }
  VarianceProfile profile;
  profile.alphas = alpha_grid;
  profile.samples = 2 * trials;
  std::vector<std::vector<double>> columns(alpha_grid.size());
  for (auto& col : columns) col.reserve(profile.samples);

  for (std::size_t t = 0; t < trials; ++t) {
    Rng trial_rng = rng.split(t);
    ConfDiffDataset data = make_confdiff_dataset(spec, n, trial_rng);
    auto s = pair_scores(params, data);
    for (int orientation = 0; orientation < 2; ++orientation) {
      if (orientation == 1) {
        for (auto& p : data.pairs) {
          std::swap(p.x, p.x_prime);
          p.c = -p.c;
        }
        for (auto& ps : s) std::swap(ps.x, ps.x_prime);
      }
      const double unbiased = confdiff_unbiased_risk(data, s, loss_kind);
      for (std::size_t k = 0; k < alpha_grid.size(); ++k) {
        const double v = confdiff_weighted_risk(data, s, loss_kind, alpha_grid[k]);
        columns[k].push_back(v);
        if (alpha_grid[k] == 0.5) {
          profile.half_column_max_abs_diff = std::max(profile.half_column_max_abs_diff, std::fabs(v - unbiased));
        }
      }
    }
  }

  std::vector<double> centered_sq;
  for (std::size_t k = 0; k < alpha_grid.size(); ++k) {
    RunningStats s;
    for (double v : columns[k]) s.add(v);
    profile.means.push_back(s.mean());
    profile.variances.push_back(s.variance());
    const double d = alpha_grid[k] - 0.5;
    centered_sq.push_back(d * d);
  }
  if (alpha_grid.size() >= 2) {
    profile.quadratic_coefficient = fit_slope(centered_sq, profile.variances);
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < alpha_grid.size(); ++k) {
      mx += centered_sq[k];
      my += profile.variances[k];
    }
    const double m = static_cast<double>(alpha_grid.size());
    profile.quadratic_intercept = my / m - profile.quadratic_coefficient * mx / m;
  }
  return profile;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope fit needs at least two aligned points");
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InvalidInput("slope fit needs distinct x values");
  return sxy / sxx;
}

namespace {

// Labeled evaluation sample in flat storage with the Bayes verdict cached.
struct EvaluationSample {
  std::size_t dim = 0;
  Vector features;
  std::vector<Label> labels;
  std::vector<unsigned char> bayes_wrong;
  double bayes_error = 0.0;

  EvaluationSample(const GaussianMixtureSpec& spec, std::size_t draws, Rng& rng) : dim(spec.dim) {
    features.reserve(draws * dim);
    labels.reserve(draws);
    bayes_wrong.reserve(draws);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < draws; ++i) {
      const LabeledExample e = sample_labeled(spec, rng);
      features.insert(features.end(), e.x.begin(), e.x.end());
      labels.push_back(e.y);
      const bool miss = bayes_decision(spec, e.x) != e.y;
      bayes_wrong.push_back(miss ? 1 : 0);
      wrong += miss ? 1 : 0;
    }
    bayes_error = static_cast<double>(wrong) / static_cast<double>(draws);
  }

  // Paired excess zero-one risk of the model over the Bayes classifier.
  double excess(const ModelParams& params) const {
    long long diff = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double g = score(params, std::span<const double>(features).subspan(i * dim, dim));
      const bool miss = loss(LossKind::zero_one, g, labels[i]) != 0.0;
      diff += static_cast<long long>(miss) - static_cast<long long>(bayes_wrong[i]);
    }
    return static_cast<double>(diff) / static_cast<double>(labels.size());
  }
};

TrainConfig seeded(const TrainConfig& base, std::size_t seed_index) {
  TrainConfig cfg = base;
  cfg.seed = derive_seed(base.seed, seed_index);
  return cfg;
}

}  // namespace

ConvergenceReport convergence_study(const GaussianMixtureSpec& spec, const std::vector<std::size_t>& n_grid,
                                    const TrainConfig& base, const StudyOptions& options) {
  spec.validate();
  base.validate();
  if (!uses_confdiff_data(base.estimator)) throw ConfigError("convergence study trains a ConfDiff estimator");
  if (n_grid.size() < 3) throw InvalidInput("n grid needs at least 3 points");
  for (std::size_t k = 1; k < n_grid.size(); ++k) {
    if (n_grid[k] <= n_grid[k - 1]) throw InvalidInput("n grid must be strictly increasing");
  }
  if (n_grid.back() < 16 * n_grid.front()) throw InvalidInput("n grid must span at least a factor of 16");
  if (options.seeds == 0) throw InvalidInput("need at least one seed");

  const Rng root(base.seed);
  Rng eval_rng = root.split("evaluation");
  const EvaluationSample eval(spec, options.eval_draws, eval_rng);

  const std::size_t runs = n_grid.size() * options.seeds;
  std::vector<double> excess(runs);
  parallel_for(runs, options.jobs, [&](std::size_t r) {
    const std::size_t gi = r / options.seeds;
    const std::size_t s = r % options.seeds;
    Rng data_rng = root.split("data").split(n_grid[gi]).split(s);
    Rng test_rng = root.split("test").split(s);
    const ConfDiffDataset data = make_confdiff_dataset(spec, n_grid[gi], data_rng);
    const auto test = make_labeled_dataset(spec, options.test_size, test_rng);
    const RunResult run = train(data, test, seeded(base, s));
    excess[r] = eval.excess(run.params);
  });

  ConvergenceReport report;
  report.bayes_error = eval.bayes_error;
  std::vector<double> log_n, log_excess;
  bool all_positive = true;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    ConvergencePoint point;
    point.n = n_grid[gi];
    RunningStats stats;
    for (std::size_t s = 0; s < options.seeds; ++s) {
      point.per_seed.push_back(excess[gi * options.seeds + s]);
      stats.add(point.per_seed.back());
    }
    point.mean_excess_risk = stats.mean();
    point.std_error = stats.std_error();
    all_positive = all_positive && point.mean_excess_risk > 0.0;
    log_n.push_back(std::log(static_cast<double>(point.n)));
    log_excess.push_back(point.mean_excess_risk > 0.0 ? std::log(point.mean_excess_risk) : 0.0);
    report.points.push_back(std::move(point));
  }
  report.slope = all_positive ? fit_slope(log_n, log_excess) : std::numeric_limits<double>::quiet_NaN();
  return report;
}

RobustnessReport robustness_study(const GaussianMixtureSpec& spec, const std::vector<NoiseCell>& grid,
                                  const TrainConfig& base, std::size_t n_pairs, const StudyOptions& options) {
  spec.validate();
  base.validate();
  if (!uses_confdiff_data(base.estimator)) throw ConfigError("robustness study trains a ConfDiff estimator");
  const auto clean_it = std::find_if(grid.begin(), grid.end(), [](const NoiseCell& c) {
    return c.prior_scale == 1.0 && c.conf_noise_std == 0.0;
  });
  if (clean_it == grid.end()) throw InvalidInput("noise grid must contain the clean cell (1, 0)");
  const std::size_t clean_index = static_cast<std::size_t>(clean_it - grid.begin());
  if (options.seeds == 0) throw InvalidInput("need at least one seed");

  const Rng root(base.seed);
  std::vector<ConfDiffDataset> clean(options.seeds);
  std::vector<std::vector<LabeledExample>> tests(options.seeds);
  for (std::size_t s = 0; s < options.seeds; ++s) {
    Rng data_rng = root.split("data").split(s);
    Rng test_rng = root.split("test").split(s);
    clean[s] = make_confdiff_dataset(spec, n_pairs, data_rng);
    tests[s] = make_labeled_dataset(spec, options.test_size, test_rng);
  }

  const std::size_t cells = grid.size();
  // One extra row of runs: plain training on the clean data, for the
  // passthrough comparison.
  const std::size_t runs = (cells + 1) * options.seeds;
  std::vector<RunResult> results(runs);
  std::vector<double> conf_error(cells * options.seeds, 0.0);
  parallel_for(runs, options.jobs, [&](std::size_t r) {
    const std::size_t cell = r / options.seeds;
    const std::size_t s = r % options.seeds;
    const TrainConfig cfg = seeded(base, s);
    if (cell == cells) {
      results[r] = train(clean[s], tests[s], cfg);
      return;
    }
    NoiseSpec noise{grid[cell].prior_scale, grid[cell].conf_noise_std, derive_seed(derive_seed(base.seed, cell), s)};
    Rng noise_rng(noise.seed);
    ConfDiffDataset noisy = corrupt_confidences(clean[s], noise, noise_rng);
    noisy.class_prior = corrupt_prior(clean[s].class_prior, noise);
    conf_error[r] = mean_abs_confidence_error(clean[s], noisy);
    results[r] = train(noisy, tests[s], cfg);
  });

  RobustnessReport report;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    RobustnessCell out;
    out.noise = grid[cell];
    RunningStats acc;
    double err = 0.0;
    for (std::size_t s = 0; s < options.seeds; ++s) {
      const double a = results[cell * options.seeds + s].final_accuracy;
      out.accuracies.push_back(a);
      acc.add(a);
      err += conf_error[cell * options.seeds + s];
    }
    out.mean_accuracy = acc.mean();
    out.std_dev = std::sqrt(acc.variance());
    out.std_error = acc.std_error();
    out.mean_abs_confidence_error = err / static_cast<double>(options.seeds);
    NoiseSpec noise{grid[cell].prior_scale, grid[cell].conf_noise_std, 0};
    out.prior_error = std::fabs(corrupt_prior(spec.prior_pos, noise) - spec.prior_pos);
    report.cells.push_back(std::move(out));
  }
  report.clean_passthrough_exact = true;
  for (std::size_t s = 0; s < options.seeds; ++s) {
    if (!(results[clean_index * options.seeds + s] == results[cells * options.seeds + s])) {
      report.clean_passthrough_exact = false;
    }
  }
  return report;
}

}  // namespace confdiff
