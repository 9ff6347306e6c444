#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "confdiff/types.hpp"

namespace confdiff {

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_hat = 1e-8;

  void validate() const;
};

struct OptimizerState {
  std::uint64_t step = 0;
  Vector first_moment;
  Vector second_moment;

  static OptimizerState for_parameters(const OptimizerConfig& config, std::size_t count);

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

/// One update of `params` in place. Weight decay is coupled: the effective
/// gradient is grads + weight_decay * params. Adam uses bias-corrected
/// moments. Throws InvalidInput on non-finite gradients or shape mismatch.
void step(const OptimizerConfig& config, OptimizerState& state, std::span<double> params,
          std::span<const double> grads);

}  // namespace confdiff
