#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "confdiff/error.hpp"
#include "confdiff/risk.hpp"
#include "confdiff/rng.hpp"
#include "oracles.hpp"

using namespace confdiff;

namespace {

const double kLn2 = std::log(2.0);

struct RandomBatch {
  std::vector<double> c;
  std::vector<PairScores> scores;
  double prior = 0.5;

  ConfidenceBatch batch() const { return {c, prior}; }
  std::vector<double> s() const {
    std::vector<double> out;
    for (const auto& p : scores) out.push_back(p.x);
    return out;
  }
  std::vector<double> s_prime() const {
    std::vector<double> out;
    for (const auto& p : scores) out.push_back(p.x_prime);
    return out;
  }
};

RandomBatch random_batch(Rng& rng, std::size_t n, double prior, double score_scale = 3.0) {
  RandomBatch b;
  b.prior = prior;
  for (std::size_t i = 0; i < n; ++i) {
    b.c.push_back(rng.uniform(-1.0, 1.0));
    b.scores.push_back({rng.normal(0.0, score_scale), rng.normal(0.0, score_scale)});
  }
  return b;
}

double numeric_grad(const std::function<double()>& f, double& slot, double h = 1e-6) {
  const double saved = slot;
  slot = saved + h;
  const double up = f();
  slot = saved - h;
  const double down = f();
  slot = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST(PairLoss, SymmetricZeroCase) {
  EXPECT_NEAR(pair_loss(0.0, {0.0, 0.0}, 0.5, LossKind::logistic), kLn2, 1e-15);
}

TEST(PairLoss, CoefficientCancellation) {
  EXPECT_NEAR(pair_loss(0.2, {1.3, 0.0}, 0.2, LossKind::logistic), 0.6 * kLn2, 1e-15);
}

TEST(PairLoss, MatchesTermByTermOracle) {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const double c = rng.uniform(-1.0, 1.0);
    const double s = rng.normal(0.0, 3.0), sp = rng.normal(0.0, 3.0);
    const double prior = rng.uniform(0.05, 0.95);
    EXPECT_NEAR(pair_loss(c, {s, sp}, prior, LossKind::logistic), oracle::pair_loss(c, s, sp, prior), 1e-12);
  }
}

TEST(UnbiasedRisk, ZeroConfidenceZeroScoresIsLn2) {
  const std::vector<double> c(10, 0.0);
  const std::vector<PairScores> s(10, {0.0, 0.0});
  EXPECT_NEAR(confdiff_unbiased_risk({c, 0.5}, s, LossKind::logistic), kLn2, 1e-15);
}

TEST(UnbiasedRisk, SinglePairHandExpansion) {
  const double s = 0.7, sp = -1.1, c = 1.0, pi = 0.5;
  const double expanded = ((pi - c) * oracle::logistic(s, 1) + (1 - pi - c) * oracle::logistic(sp, -1) +
                           (pi + c) * oracle::logistic(sp, 1) + (1 - pi + c) * oracle::logistic(s, -1)) /
                          2.0;
  const std::vector<double> cs{c};
  const std::vector<PairScores> scores{{s, sp}};
  EXPECT_NEAR(confdiff_unbiased_risk({cs, pi}, scores, LossKind::logistic), expanded, 1e-14);
}

TEST(UnbiasedRisk, MatchesIndependentOracle) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto b = random_batch(rng, 1 + t % 37, rng.uniform(0.1, 0.9));
    EXPECT_LT(oracle::relative_error(confdiff_unbiased_risk(b.batch(), b.scores, LossKind::logistic),
                                     oracle::unbiased_risk(b.c, b.s(), b.s_prime(), b.prior)),
              1e-12);
  }
}

TEST(UnbiasedRisk, InvariantUnderPairRoleSwap) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    auto b = random_batch(rng, 50, 0.3);
    const double before = confdiff_unbiased_risk(b.batch(), b.scores, LossKind::logistic);
    for (auto& c : b.c) c = -c;
    for (auto& p : b.scores) std::swap(p.x, p.x_prime);
    const double after = confdiff_unbiased_risk(b.batch(), b.scores, LossKind::logistic);
    EXPECT_LT(oracle::relative_error(before, after), 1e-12);
  }
}

TEST(UnbiasedRisk, RejectsBadInputs) {
  const std::vector<double> c{0.1};
  const std::vector<PairScores> s{{0.0, 0.0}};
  EXPECT_THROW(confdiff_unbiased_risk({c, 1.0}, s, LossKind::logistic), InvalidInput);
  EXPECT_THROW(confdiff_unbiased_risk({c, 0.0}, s, LossKind::logistic), InvalidInput);
  const std::vector<double> bad{1.5};
  EXPECT_THROW(confdiff_unbiased_risk({bad, 0.5}, s, LossKind::logistic), InvalidInput);
  const std::vector<PairScores> two{{0.0, 0.0}, {0.0, 0.0}};
  EXPECT_THROW(confdiff_unbiased_risk({c, 0.5}, two, LossKind::logistic), InvalidInput);
  EXPECT_THROW(confdiff_unbiased_risk(ConfidenceBatch{{}, 0.5}, std::span<const PairScores>{}, LossKind::logistic),
               InvalidInput);
}

TEST(WeightedRisk, EndpointsCollapseToOneOrientation) {
  Rng rng(4);
  const auto b = random_batch(rng, 40, 0.4);
  double forward = 0.0, backward = 0.0;
  for (std::size_t i = 0; i < b.c.size(); ++i) {
    forward += oracle::pair_loss(b.c[i], b.scores[i].x, b.scores[i].x_prime, b.prior);
    backward += oracle::pair_loss(-b.c[i], b.scores[i].x_prime, b.scores[i].x, b.prior);
  }
  const double n = static_cast<double>(b.c.size());
  EXPECT_NEAR(confdiff_weighted_risk(b.batch(), b.scores, LossKind::logistic, 1.0), forward / n, 1e-12);
  EXPECT_NEAR(confdiff_weighted_risk(b.batch(), b.scores, LossKind::logistic, 0.0), backward / n, 1e-12);
}

TEST(WeightedRisk, HalfEqualsUnbiasedExactly) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto b = random_batch(rng, 1 + t, rng.uniform(0.1, 0.9));
    EXPECT_EQ(confdiff_weighted_risk(b.batch(), b.scores, LossKind::logistic, 0.5),
              confdiff_unbiased_risk(b.batch(), b.scores, LossKind::logistic));
  }
}

TEST(WeightedRisk, AffineInAlpha) {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto b = random_batch(rng, 30, 0.6);
    const double v0 = confdiff_weighted_risk(b.batch(), b.scores, LossKind::logistic, 0.0);
    const double v1 = confdiff_weighted_risk(b.batch(), b.scores, LossKind::logistic, 1.0);
    const double vh = confdiff_weighted_risk(b.batch(), b.scores, LossKind::logistic, 0.5);
    EXPECT_LT(oracle::relative_error(vh, 0.5 * (v0 + v1)), 1e-12);
    const double v3 = confdiff_weighted_risk(b.batch(), b.scores, LossKind::logistic, 0.3);
    EXPECT_LT(oracle::relative_error(v3, 0.7 * v0 + 0.3 * v1), 1e-12);
  }
}

TEST(WeightedRisk, RejectsAlphaOutsideUnitInterval) {
  const std::vector<double> c{0.1};
  const std::vector<PairScores> s{{0.0, 0.0}};
  EXPECT_THROW(confdiff_weighted_risk({c, 0.5}, s, LossKind::logistic, 1.1), InvalidInput);
  EXPECT_THROW(confdiff_weighted_risk({c, 0.5}, s, LossKind::logistic, -0.1), InvalidInput);
}

TEST(TermDecomposition, SymmetricZeroCase) {
  const std::vector<double> c(8, 0.0);
  const std::vector<PairScores> s(8, {0.0, 0.0});
  const auto t = confdiff_term_decomposition({c, 0.5}, s, LossKind::logistic);
  for (double v : {t.a_hat, t.b_hat, t.c_hat, t.d_hat}) EXPECT_NEAR(v, kLn2 / 4.0, 1e-15);
}

TEST(TermDecomposition, MatchesBruteForceAccumulation) {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto b = random_batch(rng, 25, rng.uniform(0.1, 0.9));
    double a = 0, bb = 0, cc = 0, d = 0;
    const double pp = b.prior, pn = 1.0 - b.prior;
    for (std::size_t i = 0; i < b.c.size(); ++i) {
      const double s = b.scores[i].x, sp = b.scores[i].x_prime, c = b.c[i];
      a += (pp - c) * oracle::logistic(s, 1);
      bb += (pn - c) * oracle::logistic(sp, -1);
      cc += (pp + c) * oracle::logistic(sp, 1);
      d += (pn + c) * oracle::logistic(s, -1);
    }
    const double m = 2.0 * static_cast<double>(b.c.size());
    const auto dec = confdiff_term_decomposition(b.batch(), b.scores, LossKind::logistic);
    EXPECT_NEAR(dec.a_hat, a / m, 1e-12);
    EXPECT_NEAR(dec.b_hat, bb / m, 1e-12);
    EXPECT_NEAR(dec.c_hat, cc / m, 1e-12);
    EXPECT_NEAR(dec.d_hat, d / m, 1e-12);
    EXPECT_LT(oracle::relative_error(dec.a_hat + dec.b_hat + dec.c_hat + dec.d_hat,
                                     confdiff_unbiased_risk(b.batch(), b.scores, LossKind::logistic)),
              1e-12);
  }
}

TEST(CorrectedRisk, IdentityEqualsUnbiasedExactly) {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto b = random_batch(rng, 1 + t % 64, rng.uniform(0.05, 0.95), 10.0);
    EXPECT_EQ(confdiff_corrected_risk(b.batch(), b.scores, LossKind::logistic, CorrectionKind::identity),
              confdiff_unbiased_risk(b.batch(), b.scores, LossKind::logistic));
  }
}

TEST(CorrectedRisk, DominanceOnRandomBatches) {
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    const auto b = random_batch(rng, 1 + t % 64, rng.uniform(0.05, 0.95), 10.0);
    const double u = confdiff_unbiased_risk(b.batch(), b.scores, LossKind::logistic);
    for (auto f : {CorrectionKind::relu, CorrectionKind::abs}) {
      const double r = confdiff_corrected_risk(b.batch(), b.scores, LossKind::logistic, f);
      EXPECT_GE(r, u);
      EXPECT_GE(r, 0.0);
    }
  }
}

TEST(CorrectedRisk, ReluStrictlyAboveUnbiasedWhenATermIsNegative) {
  // Large positive c with pi+ = 0.2 makes (pi+ - c) negative for every pair;
  // positive scores keep the positive-class loss from being tiny.
  std::vector<double> c(20, 0.9);
  std::vector<PairScores> s(20, {-2.0, 0.5});
  const ConfidenceBatch batch{c, 0.2};
  const auto dec = confdiff_term_decomposition(batch, s, LossKind::logistic);
  ASSERT_LT(dec.a_hat, 0.0);
  EXPECT_GT(confdiff_corrected_risk(batch, s, LossKind::logistic, CorrectionKind::relu),
            confdiff_unbiased_risk(batch, s, LossKind::logistic));
}

TEST(CorrectedRisk, InactiveCorrectionEqualsUnbiased) {
  // c = 0 with priors in (0, 1) makes every coefficient positive.
  Rng rng(10);
  auto b = random_batch(rng, 30, 0.35);
  std::fill(b.c.begin(), b.c.end(), 0.0);
  const double u = confdiff_unbiased_risk(b.batch(), b.scores, LossKind::logistic);
  EXPECT_NEAR(confdiff_corrected_risk(b.batch(), b.scores, LossKind::logistic, CorrectionKind::relu), u,
              1e-12 * u);
  EXPECT_NEAR(confdiff_corrected_risk(b.batch(), b.scores, LossKind::logistic, CorrectionKind::abs), u,
              1e-12 * u);
}

TEST(CorrectedRiskGrad, IdentityMatchesUnbiasedGradient) {
  Rng rng(11);
  const auto b = random_batch(rng, 20, 0.5);
  const auto g_id = corrected_risk_grad(b.batch(), b.scores, LossKind::logistic, CorrectionKind::identity);
  const auto g_w = weighted_risk_grad(b.batch(), b.scores, LossKind::logistic, 0.5);
  ASSERT_EQ(g_id.size(), g_w.size());
  for (std::size_t i = 0; i < g_id.size(); ++i) {
    EXPECT_NEAR(g_id[i].x, g_w[i].x, 1e-15);
    EXPECT_NEAR(g_id[i].x_prime, g_w[i].x_prime, 1e-15);
  }
}

TEST(CorrectedRiskGrad, ReluWithAllTermsNegativeIsZero) {
  // c = 1 pairs drive a_hat and b_hat negative, c = -1 pairs drive c_hat and
  // d_hat negative; the opposing contributions are ~exp(-40).
  const std::vector<double> c{1.0, -1.0, 1.0, -1.0};
  const std::vector<PairScores> s{{-40.0, 40.0}, {40.0, -40.0}, {-40.0, 40.0}, {40.0, -40.0}};
  const ConfidenceBatch batch{c, 0.5};
  const auto dec = confdiff_term_decomposition(batch, s, LossKind::logistic);
  ASSERT_LT(dec.a_hat, 0.0);
  ASSERT_LT(dec.b_hat, 0.0);
  ASSERT_LT(dec.c_hat, 0.0);
  ASSERT_LT(dec.d_hat, 0.0);
  for (const auto& p : corrected_risk_grad(batch, s, LossKind::logistic, CorrectionKind::relu)) {
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.x_prime, 0.0);
  }
}

TEST(CorrectedRiskGrad, MatchesFiniteDifferences) {
  Rng rng(12);
  for (auto f : {CorrectionKind::identity, CorrectionKind::relu, CorrectionKind::abs}) {
    for (int t = 0; t < 30; ++t) {
      auto b = random_batch(rng, 8, rng.uniform(0.1, 0.9));
      const auto dec = confdiff_term_decomposition(b.batch(), b.scores, LossKind::logistic);
      const double kink = std::min({std::fabs(dec.a_hat), std::fabs(dec.b_hat), std::fabs(dec.c_hat),
                                    std::fabs(dec.d_hat)});
      if (kink < 1e-4) continue;
      const auto g = corrected_risk_grad(b.batch(), b.scores, LossKind::logistic, f);
      const auto risk = [&] { return confdiff_corrected_risk(b.batch(), b.scores, LossKind::logistic, f); };
      for (std::size_t i = 0; i < b.scores.size(); ++i) {
        EXPECT_LT(oracle::relative_error(g[i].x, numeric_grad(risk, b.scores[i].x), 1e-6), 1e-5);
        EXPECT_LT(oracle::relative_error(g[i].x_prime, numeric_grad(risk, b.scores[i].x_prime), 1e-6), 1e-5);
      }
    }
  }
}

TEST(WeightedRiskGrad, MatchesFiniteDifferences) {
  Rng rng(13);
  for (double alpha : {0.0, 0.3, 0.5, 1.0}) {
    auto b = random_batch(rng, 6, 0.4);
    const auto g = weighted_risk_grad(b.batch(), b.scores, LossKind::logistic, alpha);
    const auto risk = [&] { return confdiff_weighted_risk(b.batch(), b.scores, LossKind::logistic, alpha); };
    for (std::size_t i = 0; i < b.scores.size(); ++i) {
      EXPECT_LT(oracle::relative_error(g[i].x, numeric_grad(risk, b.scores[i].x), 1e-6), 1e-5);
      EXPECT_LT(oracle::relative_error(g[i].x_prime, numeric_grad(risk, b.scores[i].x_prime), 1e-6), 1e-5);
    }
  }
}

TEST(RiskGrad, ZeroOneIsRejected) {
  const std::vector<double> c{0.1};
  const std::vector<PairScores> s{{0.0, 0.0}};
  EXPECT_THROW(corrected_risk_grad({c, 0.5}, s, LossKind::zero_one, CorrectionKind::abs), UnsupportedGradient);
}

TEST(PcompRisk, SymmetricZeroCase) {
  const std::vector<PairScores> s(7, {0.0, 0.0});
  EXPECT_NEAR(pcomp_unbiased_risk(s, 0.5, LossKind::logistic), kLn2, 1e-15);
}

TEST(PcompRisk, SinglePairHandExpansion) {
  const double s = 1.2, sp = -0.4, pi = 0.3;
  const double expanded = oracle::logistic(s, 1) + oracle::logistic(sp, -1) - pi * oracle::logistic(s, -1) -
                          (1 - pi) * oracle::logistic(sp, 1);
  const std::vector<PairScores> scores{{s, sp}};
  EXPECT_NEAR(pcomp_unbiased_risk(scores, pi, LossKind::logistic), expanded, 1e-14);
}

TEST(PcompRisk, DegeneratePriorRejected) {
  const std::vector<PairScores> s{{0.0, 0.0}};
  EXPECT_THROW(pcomp_unbiased_risk(s, 1.0, LossKind::logistic), InvalidInput);
}

TEST(PcompRiskGrad, MatchesFiniteDifferences) {
  Rng rng(14);
  auto b = random_batch(rng, 6, 0.7);
  const auto g = pcomp_risk_grad(b.scores, 0.7, LossKind::logistic);
  const auto risk = [&] { return pcomp_unbiased_risk(b.scores, 0.7, LossKind::logistic); };
  for (std::size_t i = 0; i < b.scores.size(); ++i) {
    EXPECT_LT(oracle::relative_error(g[i].x, numeric_grad(risk, b.scores[i].x), 1e-6), 1e-5);
    EXPECT_LT(oracle::relative_error(g[i].x_prime, numeric_grad(risk, b.scores[i].x_prime), 1e-6), 1e-5);
  }
}

TEST(SoftLabelRisk, HardLabelCollapse) {
  const std::vector<double> r(4, 1.0);
  const std::vector<double> s{0.3, -1.0, 2.0, 0.0};
  const std::vector<Label> y(4, Label::positive);
  EXPECT_NEAR(soft_label_risk(r, s, LossKind::logistic), supervised_risk(y, s, LossKind::logistic), 1e-15);
}

TEST(SoftLabelRisk, HalfConfidenceZeroScoreIsLn2) {
  const std::vector<double> r(3, 0.5);
  const std::vector<double> s(3, 0.0);
  EXPECT_NEAR(soft_label_risk(r, s, LossKind::logistic), kLn2, 1e-15);
}

TEST(SoftLabelRisk, MatchesAccumulationOracle) {
  Rng rng(15);
  std::vector<double> r, s;
  double expected = 0.0;
  for (int i = 0; i < 50; ++i) {
    r.push_back(rng.uniform());
    s.push_back(rng.normal(0.0, 2.0));
    expected += r.back() * oracle::logistic(s.back(), 1) + (1 - r.back()) * oracle::logistic(s.back(), -1);
  }
  EXPECT_NEAR(soft_label_risk(r, s, LossKind::logistic), expected / 50.0, 1e-13);
  const auto g = soft_label_risk_grad(r, s, LossKind::logistic);
  const auto risk = [&] { return soft_label_risk(r, s, LossKind::logistic); };
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_LT(oracle::relative_error(g[i], numeric_grad(risk, s[i]), 1e-6), 1e-5);
  }
}

TEST(SupervisedRisk, Basics) {
  const std::vector<double> zero(4, 0.0);
  const std::vector<Label> y{Label::positive, Label::negative, Label::negative, Label::positive};
  EXPECT_NEAR(supervised_risk(y, zero, LossKind::logistic), kLn2, 1e-15);
  const std::vector<double> right{1.0, -2.0, -0.1, 3.0};
  EXPECT_EQ(supervised_risk(y, right, LossKind::zero_one), 0.0);
  const std::vector<double> mixed{1.0, 2.0, -0.1, -3.0};
  const double expected = (oracle::logistic(1.0, 1) + oracle::logistic(2.0, -1) + oracle::logistic(-0.1, -1) +
                           oracle::logistic(-3.0, 1)) /
                          4.0;
  EXPECT_NEAR(supervised_risk(y, mixed, LossKind::logistic), expected, 1e-15);
  EXPECT_EQ(supervised_risk(y, mixed, LossKind::zero_one), 0.5);
  const auto g = supervised_risk_grad(y, mixed, LossKind::logistic);
  for (std::size_t i = 0; i < y.size(); ++i) {
    EXPECT_NEAR(g[i], oracle::logistic_grad(mixed[i], label_sign(y[i])) / 4.0, 1e-15);
  }
}
