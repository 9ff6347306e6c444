#pragma once

#include <string_view>

#include "confdiff/types.hpp"

namespace confdiff {

enum class LossKind { logistic, zero_one };

/// Risk-correction wrapper f applied to each estimator term. All three are
/// 1-Lipschitz.
enum class CorrectionKind { identity, relu, abs };

std::string_view to_string(LossKind kind) noexcept;
std::string_view to_string(CorrectionKind kind) noexcept;
LossKind parse_loss_kind(std::string_view name);
CorrectionKind parse_correction_kind(std::string_view name);

/// ell(z, y). Logistic is ln(1 + exp(-y z)) evaluated without overflow;
/// zero-one treats sign(0) as +1. Throws InvalidInput for non-finite z.
double loss(LossKind kind, double z, Label y);

/// d ell / dz = -y * sigmoid(-y z). Only defined for logistic.
double loss_grad(LossKind kind, double z, Label y);

double correct(CorrectionKind kind, double z);

/// Derivative of `correct`; the subgradient at the kink is 0.
double correct_grad(CorrectionKind kind, double z);

/// Numerically stable logistic function 1 / (1 + exp(-t)).
double sigmoid(double t) noexcept;

}  // namespace confdiff
