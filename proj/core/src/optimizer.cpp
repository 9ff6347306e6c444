#include "confdiff/optimizer.hpp"

#include <cmath>
#include <string>

#include "confdiff/error.hpp"

namespace confdiff {

std::string_view to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw InvalidInput("unknown optimizer kind '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
  // lr = 0 is accepted: it freezes the parameters, which tests rely on.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw InvalidInput("learning_rate must be >= 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw InvalidInput("weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidInput("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidInput("beta2 must lie in [0, 1)");
  if (!(epsilon_hat > 0.0)) throw InvalidInput("epsilon_hat must be positive");
}

OptimizerState OptimizerState::for_parameters(const OptimizerConfig& config, std::size_t count) {
  OptimizerState state;
  if (config.kind == OptimizerKind::adam) {
    state.first_moment.assign(count, 0.0);
    state.second_moment.assign(count, 0.0);
  }
  return state;
}

void step(const OptimizerConfig& config, OptimizerState& state, std::span<double> params,
          std::span<const double> grads) {
  if (params.size() != grads.size()) throw InvalidInput("gradient and parameter counts differ");
  for (double g : grads) {
    if (!std::isfinite(g)) throw InvalidInput("non-finite gradient entry");
  }
  const double lr = config.learning_rate;
  const double wd = config.weight_decay;
  ++state.step;

  if (config.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * (grads[i] + wd * params[i]);
    return;
  }

  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw InvalidInput("optimizer state does not match the parameter count");
  }
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + wd * params[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon_hat);
  }
}

}  // namespace confdiff
