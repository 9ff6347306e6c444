#pragma once

#include <span>
#include <vector>

#include "confdiff/loss.hpp"
#include "confdiff/types.hpp"

namespace confdiff {

/// Confidence differences of a batch of pairs together with the class prior.
/// Estimators only need the c values; features enter through the scores.
struct ConfidenceBatch {
  std::span<const double> c;
  double class_prior = 0.5;

  double negative_prior() const noexcept { return 1.0 - class_prior; }
};

/// Normalized coefficient-weighted loss sums of the corrected estimator.
///   a_hat = sum (pi+ - c) l(g(x),  +1) / 2n
///   b_hat = sum (pi- - c) l(g(x'), -1) / 2n
///   c_hat = sum (pi+ + c) l(g(x'), +1) / 2n
///   d_hat = sum (pi- + c) l(g(x),  -1) / 2n
struct TermDecomposition {
  double a_hat = 0.0;
  double b_hat = 0.0;
  double c_hat = 0.0;
  double d_hat = 0.0;

  // Summation order shared by the unbiased and corrected estimators, which
  // keeps corrected >= unbiased exact in floating point.
  double total() const noexcept { return (a_hat + b_hat) + (c_hat + d_hat); }
};

/// (pi+ - c) l(s_x, +1) + (pi- - c) l(s_x', -1). May be negative. Evaluating
/// the swapped pair is pair_loss(-c, {s_x', s_x}, ...).
double pair_loss(double c, PairScores scores, double class_prior, LossKind loss);

TermDecomposition confdiff_term_decomposition(const ConfidenceBatch& batch,
                                              std::span<const PairScores> scores, LossKind loss);

/// (1/2n) sum [L(x, x') + L(x', x)], the unbiased ConfDiff risk.
double confdiff_unbiased_risk(const ConfidenceBatch& batch, std::span<const PairScores> scores,
                              LossKind loss);

/// (1/n) sum [alpha L(x, x') + (1 - alpha) L(x', x)]. Unbiased for every
/// alpha in [0, 1]; alpha = 0.5 reproduces confdiff_unbiased_risk bit for bit.
double confdiff_weighted_risk(const ConfidenceBatch& batch, std::span<const PairScores> scores,
                              LossKind loss, double alpha);

/// f(a_hat) + f(b_hat) + f(c_hat) + f(d_hat).
double confdiff_corrected_risk(const ConfidenceBatch& batch, std::span<const PairScores> scores,
                               LossKind loss, CorrectionKind correction);

/// Gradient of confdiff_corrected_risk with respect to every score.
std::vector<PairScores> corrected_risk_grad(const ConfidenceBatch& batch,
                                            std::span<const PairScores> scores, LossKind loss,
                                            CorrectionKind correction);

/// Gradient of confdiff_weighted_risk with respect to every score.
std::vector<PairScores> weighted_risk_grad(const ConfidenceBatch& batch,
                                           std::span<const PairScores> scores, LossKind loss,
                                           double alpha);

/// Pairwise-comparison baseline:
/// (1/n) sum [l(s_x,+1) + l(s_x',-1) - pi+ l(s_x,-1) - pi- l(s_x',+1)].
double pcomp_unbiased_risk(std::span<const PairScores> scores, double class_prior, LossKind loss);
std::vector<PairScores> pcomp_risk_grad(std::span<const PairScores> scores, double class_prior,
                                        LossKind loss);

/// (1/n) sum [r l(s,+1) + (1 - r) l(s,-1)].
double soft_label_risk(std::span<const double> confidences, std::span<const double> scores,
                       LossKind loss);
std::vector<double> soft_label_risk_grad(std::span<const double> confidences,
                                         std::span<const double> scores, LossKind loss);

/// (1/n) sum l(s_i, y_i).
double supervised_risk(std::span<const Label> labels, std::span<const double> scores, LossKind loss);
std::vector<double> supervised_risk_grad(std::span<const Label> labels,
                                         std::span<const double> scores, LossKind loss);

// Convenience overloads over whole datasets.
std::vector<double> confidences(const ConfDiffDataset& data);
double confdiff_unbiased_risk(const ConfDiffDataset& data, std::span<const PairScores> scores,
                              LossKind loss);
double confdiff_weighted_risk(const ConfDiffDataset& data, std::span<const PairScores> scores,
                              LossKind loss, double alpha);
TermDecomposition confdiff_term_decomposition(const ConfDiffDataset& data,
                                              std::span<const PairScores> scores, LossKind loss);
double confdiff_corrected_risk(const ConfDiffDataset& data, std::span<const PairScores> scores,
                               LossKind loss, CorrectionKind correction);
double soft_label_risk(std::span<const SoftLabeledExample> examples, std::span<const double> scores,
                       LossKind loss);
double supervised_risk(std::span<const LabeledExample> examples, std::span<const double> scores,
                       LossKind loss);

}  // namespace confdiff
