#include "confdiff/risk.hpp"

#include <cmath>
#include <string>

#include "confdiff/error.hpp"

namespace confdiff {

namespace {

void check_prior(double prior) {
  if (!(prior > 0.0 && prior < 1.0)) {
    throw InvalidInput("class prior must lie in (0, 1), got " + std::to_string(prior));
  }
}

void check_confidence_difference(double c) {
  if (!(c >= -1.0 && c <= 1.0)) {
    throw InvalidInput("confidence difference must lie in [-1, 1], got " + std::to_string(c));
  }
}

template <typename A, typename B>
void check_aligned(const A& a, const B& b) {
  if (a.empty()) throw InvalidInput("empty batch");
  if (a.size() != b.size()) throw InvalidInput("scores are not aligned with the batch");
}

void check_batch(const ConfidenceBatch& batch, std::span<const PairScores> scores) {
  check_prior(batch.class_prior);
  check_aligned(batch.c, scores);
  for (double c : batch.c) check_confidence_difference(c);
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidInput("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

}  // namespace

void ConfDiffDataset::validate() const {
  check_prior(class_prior);
  const std::size_t d = dim();
  for (const auto& p : pairs) {
    if (p.x.size() != d || p.x_prime.size() != d) throw InvalidInput("pairs have ragged feature dimensions");
    check_confidence_difference(p.c);
  }
}

void PcompDataset::validate() const {
  check_prior(class_prior);
  const std::size_t d = dim();
  for (const auto& p : pairs) {
    if (p.x.size() != d || p.x_prime.size() != d) throw InvalidInput("pairs have ragged feature dimensions");
  }
}

double pair_loss(double c, PairScores scores, double class_prior, LossKind loss_kind) {
  check_prior(class_prior);
  check_confidence_difference(c);
  const double neg_prior = 1.0 - class_prior;
  return (class_prior - c) * loss(loss_kind, scores.x, Label::positive) +
         (neg_prior - c) * loss(loss_kind, scores.x_prime, Label::negative);
}

TermDecomposition confdiff_term_decomposition(const ConfidenceBatch& batch,
                                              std::span<const PairScores> scores, LossKind loss_kind) {
  check_batch(batch, scores);
  const double pos = batch.class_prior;
  const double neg = batch.negative_prior();
  double sa = 0.0, sb = 0.0, sc = 0.0, sd = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double c = batch.c[i];
    const PairScores s = scores[i];
    sa += (pos - c) * loss(loss_kind, s.x, Label::positive);
    sb += (neg - c) * loss(loss_kind, s.x_prime, Label::negative);
    sc += (pos + c) * loss(loss_kind, s.x_prime, Label::positive);
    sd += (neg + c) * loss(loss_kind, s.x, Label::negative);
  }
  const double denom = 2.0 * static_cast<double>(scores.size());
  return {sa / denom, sb / denom, sc / denom, sd / denom};
}

double confdiff_unbiased_risk(const ConfidenceBatch& batch, std::span<const PairScores> scores,
                              LossKind loss_kind) {
  return confdiff_term_decomposition(batch, scores, loss_kind).total();
}

double confdiff_weighted_risk(const ConfidenceBatch& batch, std::span<const PairScores> scores,
                              LossKind loss_kind, double alpha) {
  check_alpha(alpha);
  // a_hat + b_hat is half the mean of L(x, x'); c_hat + d_hat half the mean of
  // L(x', x). Doubling is exact, so alpha = 0.5 collapses onto total().
  const TermDecomposition t = confdiff_term_decomposition(batch, scores, loss_kind);
  return (2.0 * alpha) * (t.a_hat + t.b_hat) + (2.0 * (1.0 - alpha)) * (t.c_hat + t.d_hat);
}

double confdiff_corrected_risk(const ConfidenceBatch& batch, std::span<const PairScores> scores,
                               LossKind loss_kind, CorrectionKind correction) {
  const TermDecomposition t = confdiff_term_decomposition(batch, scores, loss_kind);
  return (correct(correction, t.a_hat) + correct(correction, t.b_hat)) +
         (correct(correction, t.c_hat) + correct(correction, t.d_hat));
}

namespace {

// Gradient of wa*a_hat + wb*b_hat + wc*c_hat + wd*d_hat.
std::vector<PairScores> weighted_terms_grad(const ConfidenceBatch& batch,
                                            std::span<const PairScores> scores, LossKind loss_kind,
                                            double wa, double wb, double wc, double wd) {
  const double pos = batch.class_prior;
  const double neg = batch.negative_prior();
  const double inv = 1.0 / (2.0 * static_cast<double>(scores.size()));
  std::vector<PairScores> grad(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double c = batch.c[i];
    const PairScores s = scores[i];
    grad[i].x = (wa * (pos - c) * loss_grad(loss_kind, s.x, Label::positive) +
                 wd * (neg + c) * loss_grad(loss_kind, s.x, Label::negative)) *
                inv;
    grad[i].x_prime = (wb * (neg - c) * loss_grad(loss_kind, s.x_prime, Label::negative) +
                       wc * (pos + c) * loss_grad(loss_kind, s.x_prime, Label::positive)) *
                      inv;
  }
  return grad;
}

}  // namespace

std::vector<PairScores> corrected_risk_grad(const ConfidenceBatch& batch,
                                            std::span<const PairScores> scores, LossKind loss_kind,
                                            CorrectionKind correction) {
  if (loss_kind != LossKind::logistic) throw UnsupportedGradient("risk gradient needs the logistic loss");
  const TermDecomposition t = confdiff_term_decomposition(batch, scores, loss_kind);
  return weighted_terms_grad(batch, scores, loss_kind, correct_grad(correction, t.a_hat),
                             correct_grad(correction, t.b_hat), correct_grad(correction, t.c_hat),
                             correct_grad(correction, t.d_hat));
}

std::vector<PairScores> weighted_risk_grad(const ConfidenceBatch& batch,
                                           std::span<const PairScores> scores, LossKind loss_kind,
                                           double alpha) {
  if (loss_kind != LossKind::logistic) throw UnsupportedGradient("risk gradient needs the logistic loss");
  check_alpha(alpha);
  check_batch(batch, scores);
  const double first = 2.0 * alpha;
  const double second = 2.0 * (1.0 - alpha);
  return weighted_terms_grad(batch, scores, loss_kind, first, first, second, second);
}

double pcomp_unbiased_risk(std::span<const PairScores> scores, double class_prior, LossKind loss_kind) {
  check_prior(class_prior);
  if (scores.empty()) throw InvalidInput("empty batch");
  const double neg = 1.0 - class_prior;
  double sum = 0.0;
  for (const PairScores& s : scores) {
    sum += loss(loss_kind, s.x, Label::positive) + loss(loss_kind, s.x_prime, Label::negative) -
           class_prior * loss(loss_kind, s.x, Label::negative) -
           neg * loss(loss_kind, s.x_prime, Label::positive);
  }
  return sum / static_cast<double>(scores.size());
}

std::vector<PairScores> pcomp_risk_grad(std::span<const PairScores> scores, double class_prior,
                                        LossKind loss_kind) {
  check_prior(class_prior);
  if (scores.empty()) throw InvalidInput("empty batch");
  const double neg = 1.0 - class_prior;
  const double inv = 1.0 / static_cast<double>(scores.size());
  std::vector<PairScores> grad(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const PairScores s = scores[i];
    grad[i].x = (loss_grad(loss_kind, s.x, Label::positive) -
                 class_prior * loss_grad(loss_kind, s.x, Label::negative)) *
                inv;
    grad[i].x_prime = (loss_grad(loss_kind, s.x_prime, Label::negative) -
                       neg * loss_grad(loss_kind, s.x_prime, Label::positive)) *
                      inv;
  }
  return grad;
}

double soft_label_risk(std::span<const double> confidences, std::span<const double> scores,
                       LossKind loss_kind) {
  check_aligned(confidences, scores);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double r = confidences[i];
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidInput("soft label must lie in [0, 1]");
    sum += r * loss(loss_kind, scores[i], Label::positive) +
           (1.0 - r) * loss(loss_kind, scores[i], Label::negative);
  }
  return sum / static_cast<double>(scores.size());
}

std::vector<double> soft_label_risk_grad(std::span<const double> confidences,
                                         std::span<const double> scores, LossKind loss_kind) {
  check_aligned(confidences, scores);
  const double inv = 1.0 / static_cast<double>(scores.size());
  std::vector<double> grad(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double r = confidences[i];
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidInput("soft label must lie in [0, 1]");
    grad[i] = (r * loss_grad(loss_kind, scores[i], Label::positive) +
               (1.0 - r) * loss_grad(loss_kind, scores[i], Label::negative)) *
              inv;
  }
  return grad;
}

double supervised_risk(std::span<const Label> labels, std::span<const double> scores,
                       LossKind loss_kind) {
  check_aligned(labels, scores);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) sum += loss(loss_kind, scores[i], labels[i]);
  return sum / static_cast<double>(scores.size());
}

std::vector<double> supervised_risk_grad(std::span<const Label> labels,
                                         std::span<const double> scores, LossKind loss_kind) {
  check_aligned(labels, scores);
  const double inv = 1.0 / static_cast<double>(scores.size());
  std::vector<double> grad(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) grad[i] = loss_grad(loss_kind, scores[i], labels[i]) * inv;
  return grad;
}

std::vector<double> confidences(const ConfDiffDataset& data) {
  std::vector<double> c;
  c.reserve(data.size());
  for (const auto& p : data.pairs) c.push_back(p.c);
  return c;
}

double confdiff_unbiased_risk(const ConfDiffDataset& data, std::span<const PairScores> scores,
                              LossKind loss_kind) {
  const auto c = confidences(data);
  return confdiff_unbiased_risk(ConfidenceBatch{c, data.class_prior}, scores, loss_kind);
}

double confdiff_weighted_risk(const ConfDiffDataset& data, std::span<const PairScores> scores,
                              LossKind loss_kind, double alpha) {
  const auto c = confidences(data);
  return confdiff_weighted_risk(ConfidenceBatch{c, data.class_prior}, scores, loss_kind, alpha);
}

TermDecomposition confdiff_term_decomposition(const ConfDiffDataset& data,
                                              std::span<const PairScores> scores, LossKind loss_kind) {
  const auto c = confidences(data);
  return confdiff_term_decomposition(ConfidenceBatch{c, data.class_prior}, scores, loss_kind);
}

double confdiff_corrected_risk(const ConfDiffDataset& data, std::span<const PairScores> scores,
                               LossKind loss_kind, CorrectionKind correction) {
  const auto c = confidences(data);
  return confdiff_corrected_risk(ConfidenceBatch{c, data.class_prior}, scores, loss_kind, correction);
}

double soft_label_risk(std::span<const SoftLabeledExample> examples, std::span<const double> scores,
                       LossKind loss_kind) {
  std::vector<double> r;
  r.reserve(examples.size());
  for (const auto& e : examples) r.push_back(e.r);
  return soft_label_risk(std::span<const double>(r), scores, loss_kind);
}

double supervised_risk(std::span<const LabeledExample> examples, std::span<const double> scores,
                       LossKind loss_kind) {
  std::vector<Label> y;
  y.reserve(examples.size());
  for (const auto& e : examples) y.push_back(e.y);
  return supervised_risk(std::span<const Label>(y), scores, loss_kind);
}

}  // namespace confdiff
