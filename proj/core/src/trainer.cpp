#include "confdiff/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "confdiff/error.hpp"
#include "confdiff/risk.hpp"
#include "confdiff/rng.hpp"

namespace confdiff {

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::confdiff_unbiased: return "confdiff_unbiased";
    case EstimatorKind::confdiff_relu: return "confdiff_relu";
    case EstimatorKind::confdiff_abs: return "confdiff_abs";
    case EstimatorKind::pcomp_unbiased: return "pcomp_unbiased";
    case EstimatorKind::soft_label: return "soft_label";
    case EstimatorKind::supervised_hard: return "supervised_hard";
  }
  return "?";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  for (auto kind : {EstimatorKind::confdiff_unbiased, EstimatorKind::confdiff_relu, EstimatorKind::confdiff_abs,
                    EstimatorKind::pcomp_unbiased, EstimatorKind::soft_label, EstimatorKind::supervised_hard}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

bool uses_confdiff_data(EstimatorKind kind) noexcept {
  return kind == EstimatorKind::confdiff_unbiased || kind == EstimatorKind::confdiff_relu ||
         kind == EstimatorKind::confdiff_abs;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (eval_tail_epochs == 0 || eval_tail_epochs > epochs) {
    throw ConfigError("eval_tail_epochs must lie in [1, epochs]");
  }
  if (batch_pairs == 0) throw ConfigError("batch_pairs must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (alpha != 0.5 && estimator != EstimatorKind::confdiff_unbiased) {
    throw ConfigError("alpha weighting only applies to confdiff_unbiased");
  }
  try {
    optimizer.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

namespace {

const char* data_kind_name(const TrainingData& data) {
  switch (data.index()) {
    case 0: return "confdiff pairs";
    case 1: return "pcomp pairs";
    case 2: return "soft-labeled examples";
    default: return "labeled examples";
  }
}

std::size_t data_dim(const TrainingData& data) {
  return std::visit(
      [](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConfDiffDataset> || std::is_same_v<T, PcompDataset>) {
          return d.dim();
        } else {
          return d.empty() ? 0 : d.front().x.size();
        }
      },
      data);
}

std::size_t data_size(const TrainingData& data) {
  return std::visit([](const auto& d) -> std::size_t { return d.size(); }, data);
}

// Risk and its score gradient over one batch of pairs.
struct PairObjective {
  EstimatorKind estimator;
  double alpha;

  double risk(std::span<const double> c, double prior, std::span<const PairScores> s) const {
    const ConfidenceBatch batch{c, prior};
    switch (estimator) {
      case EstimatorKind::confdiff_unbiased:
        return alpha == 0.5 ? confdiff_unbiased_risk(batch, s, LossKind::logistic)
                            : confdiff_weighted_risk(batch, s, LossKind::logistic, alpha);
      case EstimatorKind::confdiff_relu:
        return confdiff_corrected_risk(batch, s, LossKind::logistic, CorrectionKind::relu);
      case EstimatorKind::confdiff_abs:
        return confdiff_corrected_risk(batch, s, LossKind::logistic, CorrectionKind::abs);
      case EstimatorKind::pcomp_unbiased: return pcomp_unbiased_risk(s, prior, LossKind::logistic);
      default: break;
    }
    throw ConfigError("estimator does not consume pairs");
  }

  std::vector<PairScores> grad(std::span<const double> c, double prior, std::span<const PairScores> s) const {
    const ConfidenceBatch batch{c, prior};
    switch (estimator) {
      case EstimatorKind::confdiff_unbiased:
        return alpha == 0.5 ? corrected_risk_grad(batch, s, LossKind::logistic, CorrectionKind::identity)
                            : weighted_risk_grad(batch, s, LossKind::logistic, alpha);
      case EstimatorKind::confdiff_relu:
        return corrected_risk_grad(batch, s, LossKind::logistic, CorrectionKind::relu);
      case EstimatorKind::confdiff_abs:
        return corrected_risk_grad(batch, s, LossKind::logistic, CorrectionKind::abs);
      case EstimatorKind::pcomp_unbiased: return pcomp_risk_grad(s, prior, LossKind::logistic);
      default: break;
    }
    throw ConfigError("estimator does not consume pairs");
  }
};

// Uniform access to the training units (pairs or single examples).
struct UnitView {
  const TrainingData& data;

  bool paired() const { return data.index() <= 1; }

  std::span<const double> first(std::size_t i) const {
    if (const auto* d = std::get_if<ConfDiffDataset>(&data)) return d->pairs[i].x;
    if (const auto* d = std::get_if<PcompDataset>(&data)) return d->pairs[i].x;
    if (const auto* d = std::get_if<std::vector<SoftLabeledExample>>(&data)) return (*d)[i].x;
    return std::get<std::vector<LabeledExample>>(data)[i].x;
  }

  std::span<const double> second(std::size_t i) const {
    if (const auto* d = std::get_if<ConfDiffDataset>(&data)) return d->pairs[i].x_prime;
    return std::get<PcompDataset>(data).pairs[i].x_prime;
  }

  double prior() const {
    if (const auto* d = std::get_if<ConfDiffDataset>(&data)) return d->class_prior;
    if (const auto* d = std::get_if<PcompDataset>(&data)) return d->class_prior;
    return 0.5;
  }

  double confidence(std::size_t i) const {
    if (const auto* d = std::get_if<ConfDiffDataset>(&data)) return d->pairs[i].c;
    return 0.0;
  }

  double soft_label(std::size_t i) const { return std::get<std::vector<SoftLabeledExample>>(data)[i].r; }
  Label label(std::size_t i) const { return std::get<std::vector<LabeledExample>>(data)[i].y; }
};

class BatchRunner {
 public:
  BatchRunner(const TrainingData& data, const TrainConfig& config)
      : units_{data}, config_(config), objective_{config.estimator, config.alpha} {}

  // Risk of `idx` under `params`. With `grad` non-null, also accumulates the
  // parameter gradient of that risk.
  double run(const ModelParams& params, std::span<const std::size_t> idx, std::span<double> grad,
             bool want_grad) {
    const std::size_t n = idx.size();
    if (caches_.size() < 2 * n) caches_.resize(2 * n);
    if (units_.paired()) {
      pair_scores_.resize(n);
      c_.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        pair_scores_[k].x = forward(params, units_.first(idx[k]), caches_[2 * k]);
        pair_scores_[k].x_prime = forward(params, units_.second(idx[k]), caches_[2 * k + 1]);
        c_[k] = units_.confidence(idx[k]);
      }
      const double risk = objective_.risk(c_, units_.prior(), pair_scores_);
      if (want_grad && std::isfinite(risk)) {
        const auto g = objective_.grad(c_, units_.prior(), pair_scores_);
        for (std::size_t k = 0; k < n; ++k) {
          backward(params, caches_[2 * k], g[k].x, grad);
          backward(params, caches_[2 * k + 1], g[k].x_prime, grad);
        }
      }
      return risk;
    }

    point_scores_.resize(n);
    for (std::size_t k = 0; k < n; ++k) point_scores_[k] = forward(params, units_.first(idx[k]), caches_[k]);
    double risk = 0.0;
    std::vector<double> g;
    if (config_.estimator == EstimatorKind::soft_label) {
      r_.resize(n);
      for (std::size_t k = 0; k < n; ++k) r_[k] = units_.soft_label(idx[k]);
      risk = soft_label_risk(std::span<const double>(r_), point_scores_, LossKind::logistic);
      if (want_grad && std::isfinite(risk)) g = soft_label_risk_grad(r_, point_scores_, LossKind::logistic);
    } else {
      y_.resize(n);
      for (std::size_t k = 0; k < n; ++k) y_[k] = units_.label(idx[k]);
      risk = supervised_risk(std::span<const Label>(y_), point_scores_, LossKind::logistic);
      if (want_grad && std::isfinite(risk)) g = supervised_risk_grad(y_, point_scores_, LossKind::logistic);
    }
    if (want_grad && std::isfinite(risk)) {
      for (std::size_t k = 0; k < n; ++k) backward(params, caches_[k], g[k], grad);
    }
    return risk;
  }

 private:
  UnitView units_;
  const TrainConfig& config_;
  PairObjective objective_;
  std::vector<ForwardCache> caches_;
  std::vector<PairScores> pair_scores_;
  std::vector<double> c_;
  std::vector<double> point_scores_;
  std::vector<double> r_;
  std::vector<Label> y_;
};

}  // namespace

void check_compatible(EstimatorKind estimator, const TrainingData& data) {
  bool ok = false;
  switch (estimator) {
    case EstimatorKind::confdiff_unbiased:
    case EstimatorKind::confdiff_relu:
    case EstimatorKind::confdiff_abs: ok = std::holds_alternative<ConfDiffDataset>(data); break;
    case EstimatorKind::pcomp_unbiased: ok = std::holds_alternative<PcompDataset>(data); break;
    case EstimatorKind::soft_label: ok = std::holds_alternative<std::vector<SoftLabeledExample>>(data); break;
    case EstimatorKind::supervised_hard: ok = std::holds_alternative<std::vector<LabeledExample>>(data); break;
  }
  if (!ok) {
    throw ConfigError("estimator " + std::string(to_string(estimator)) + " cannot train on " +
                      data_kind_name(data));
  }
}

double evaluate_accuracy(const ModelParams& params, std::span<const LabeledExample> test) {
  if (test.empty()) throw InvalidInput("empty test set");
  std::size_t hits = 0;
  for (const auto& e : test) {
    const Label predicted = score(params, e.x) >= 0.0 ? Label::positive : Label::negative;
    if (predicted == e.y) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

double training_risk(const TrainingData& data, const ModelParams& params, const TrainConfig& config) {
  check_compatible(config.estimator, data);
  std::vector<std::size_t> all(data_size(data));
  std::iota(all.begin(), all.end(), std::size_t{0});
  BatchRunner runner(data, config);
  return runner.run(params, all, {}, false);
}

RunResult train(const TrainingData& data, std::span<const LabeledExample> test, const TrainConfig& config) {
  config.validate();
  check_compatible(config.estimator, data);
  const std::size_t n = data_size(data);
  if (n == 0) throw InvalidInput("empty training set");
  if (test.empty()) throw InvalidInput("empty test set");
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConfDiffDataset> || std::is_same_v<T, PcompDataset>) d.validate();
      },
      data);

  ModelSpec model = config.model;
  const std::size_t dim = data_dim(data);
  if (model.input_dim == 0) model.input_dim = dim;
  if (model.input_dim != dim) throw ConfigError("model input_dim does not match the data dimension");
  const Rng root(config.seed);
  model.init_seed = derive_seed(config.seed, stream_key("init"));

  RunResult result;
  result.params = init_model(model);
  ModelParams& params = result.params;
  OptimizerState opt = OptimizerState::for_parameters(config.optimizer, params.parameter_count());
  Rng shuffle_rng = root.split("shuffle");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> all = order;
  Vector grad(params.parameter_count());
  BatchRunner runner(data, config);

  result.epochs.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    // Numeric failures inside an epoch (non-finite scores reaching the loss,
    // non-finite gradients reaching the optimizer) surface as InvalidInput.
    try {
      for (std::size_t start = 0; start < n; start += config.batch_pairs) {
        const std::size_t stop = std::min(n, start + config.batch_pairs);
        std::fill(grad.begin(), grad.end(), 0.0);
        const double batch_risk =
            runner.run(params, std::span<const std::size_t>(order).subspan(start, stop - start), grad, true);
        if (!std::isfinite(batch_risk)) throw AbortedRun("non-finite minibatch risk", epoch);
        step(config.optimizer, opt, params.values(), grad);
      }
      const double risk = runner.run(params, all, {}, false);
      if (!std::isfinite(risk)) throw AbortedRun("non-finite training risk", epoch);
      result.epochs.push_back({epoch, risk, evaluate_accuracy(params, test)});
    } catch (const InvalidInput& e) {
      throw AbortedRun(e.what(), epoch);
    }
  }

  double tail = 0.0;
  for (std::size_t k = config.epochs - config.eval_tail_epochs; k < config.epochs; ++k) {
    tail += result.epochs[k].test_accuracy;
  }
  result.final_accuracy = tail / static_cast<double>(config.eval_tail_epochs);
  result.min_train_risk = std::numeric_limits<double>::infinity();
  for (const auto& e : result.epochs) result.min_train_risk = std::min(result.min_train_risk, e.train_risk);
  return result;
}

}  // namespace confdiff
