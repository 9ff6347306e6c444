#include "confdiff/loss.hpp"

#include <cmath>
#include <string>

#include "confdiff/error.hpp"

namespace confdiff {

std::string_view to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::logistic: return "logistic";
    case LossKind::zero_one: return "zero_one";
  }
  return "?";
}

std::string_view to_string(CorrectionKind kind) noexcept {
  switch (kind) {
    case CorrectionKind::identity: return "identity";
    case CorrectionKind::relu: return "relu";
    case CorrectionKind::abs: return "abs";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "zero_one") return LossKind::zero_one;
  throw InvalidInput("unknown loss kind '" + std::string(name) + "'");
}

CorrectionKind parse_correction_kind(std::string_view name) {
  if (name == "identity") return CorrectionKind::identity;
  if (name == "relu") return CorrectionKind::relu;
  if (name == "abs") return CorrectionKind::abs;
  throw InvalidInput("unknown correction kind '" + std::string(name) + "'");
}

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// ln(1 + exp(m)) for any finite m.
double softplus(double m) noexcept {
  if (m > 0.0) return m + std::log1p(std::exp(-m));
  return std::log1p(std::exp(m));
}

void require_finite(double z) {
  if (!std::isfinite(z)) throw InvalidInput("score must be finite");
}

}  // namespace

double loss(LossKind kind, double z, Label y) {
  require_finite(z);
  switch (kind) {
    case LossKind::logistic:
      // -y*z is formed by negation only, so ell(z,+1) == ell(-z,-1) bit for bit.
      return softplus(y == Label::positive ? -z : z);
    case LossKind::zero_one: {
      const Label predicted = z >= 0.0 ? Label::positive : Label::negative;
      return predicted == y ? 0.0 : 1.0;
    }
  }
  return 0.0;
}

double loss_grad(LossKind kind, double z, Label y) {
  require_finite(z);
  if (kind != LossKind::logistic) throw UnsupportedGradient("zero-one loss has no gradient");
  const double margin = y == Label::positive ? -z : z;
  return -label_sign(y) * sigmoid(margin);
}

double correct(CorrectionKind kind, double z) {
  switch (kind) {
    case CorrectionKind::identity: return z;
    case CorrectionKind::relu: return z > 0.0 ? z : 0.0;
    case CorrectionKind::abs: return std::fabs(z);
  }
  return z;
}

double correct_grad(CorrectionKind kind, double z) {
  switch (kind) {
    case CorrectionKind::identity: return 1.0;
    case CorrectionKind::relu: return z > 0.0 ? 1.0 : 0.0;
    case CorrectionKind::abs: return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
  }
  return 1.0;
}

}  // namespace confdiff
