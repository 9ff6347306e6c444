#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "confdiff/error.hpp"
#include "confdiff/optimizer.hpp"
#include "confdiff/rng.hpp"

using namespace confdiff;

namespace {

// Adam with L2 folded into the gradient, written out directly.
struct ReferenceAdam {
  double lr, wd, b1, b2, eps;
  std::vector<double> m, v;
  int t = 0;

  void step(std::vector<double>& p, const std::vector<double>& g) {
    if (m.empty()) m.assign(p.size(), 0.0), v.assign(p.size(), 0.0);
    ++t;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] + wd * p[i];
      m[i] = b1 * m[i] + (1 - b1) * gi;
      v[i] = b2 * v[i] + (1 - b2) * gi * gi;
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      p[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

}  // namespace

TEST(Optimizer, DefaultsAreStandardAdam) {
  const OptimizerConfig c;
  EXPECT_EQ(c.kind, OptimizerKind::adam);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.weight_decay, 1e-5);
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.epsilon_hat, 1e-8);
}

TEST(Optimizer, SgdStepIsExact) {
  OptimizerConfig c{OptimizerKind::sgd, 0.1, 0.0};
  auto state = OptimizerState::for_parameters(c, 3);
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> g{0.3, 0.2, -1.0};
  step(c, state, p, g);
  EXPECT_EQ(p[0], 1.0 - 0.1 * 0.3);
  EXPECT_EQ(p[1], -2.0 - 0.1 * 0.2);
  EXPECT_EQ(p[2], 0.5 - 0.1 * -1.0);
}

TEST(Optimizer, ZeroLearningRateFreezesParams) {
  for (auto kind : {OptimizerKind::sgd, OptimizerKind::adam}) {
    OptimizerConfig c{kind, 0.0, 1e-5};
    auto state = OptimizerState::for_parameters(c, 2);
    std::vector<double> p{1.0, 2.0};
    step(c, state, p, std::vector<double>{5.0, -3.0});
    EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
  }
}

TEST(Optimizer, AdamZeroGradZeroDecayLeavesParams) {
  OptimizerConfig c;
  c.weight_decay = 0.0;
  auto state = OptimizerState::for_parameters(c, 2);
  std::vector<double> p{1.0, 2.0};
  step(c, state, p, std::vector<double>{0.0, 0.0});
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(state.step, 1u);
}

TEST(Optimizer, AdamMatchesReferenceImplementation) {
  OptimizerConfig c;
  ReferenceAdam ref{c.learning_rate, c.weight_decay, c.beta1, c.beta2, c.epsilon_hat, {}, {}};
  Rng rng(1);
  std::vector<double> p(6), q;
  for (auto& v : p) v = rng.normal();
  q = p;
  auto state = OptimizerState::for_parameters(c, p.size());
  for (int t = 0; t < 50; ++t) {
    std::vector<double> g(p.size());
    for (auto& v : g) v = rng.normal();
    step(c, state, p, g);
    ref.step(q, g);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
  }
}

TEST(Optimizer, AdamFirstStepIsSignLike) {
  OptimizerConfig c;
  c.weight_decay = 0.0;
  auto state = OptimizerState::for_parameters(c, 2);
  std::vector<double> p{0.0, 0.0};
  step(c, state, p, std::vector<double>{2.5, -0.01});
  EXPECT_NEAR(p[0], -c.learning_rate, 1e-10);
  EXPECT_NEAR(p[1], c.learning_rate, 1e-8);
}

TEST(Optimizer, AdamIsScaleInvariantAfterWarmup) {
  OptimizerConfig c;
  c.weight_decay = 0.0;
  Rng rng(2);
  std::vector<std::vector<double>> grads;
  for (int t = 0; t < 150; ++t) grads.push_back({rng.normal(), rng.normal(), rng.normal()});
  std::vector<double> a{0.1, 0.2, 0.3}, b = a;
  auto sa = OptimizerState::for_parameters(c, 3), sb = sa;
  for (const auto& g : grads) {
    step(c, sa, a, g);
    std::vector<double> scaled = g;
    for (auto& v : scaled) v *= 1e3;
    step(c, sb, b, scaled);
  }
  for (int i = 0; i < 3; ++i) EXPECT_LT(std::fabs(a[i] - b[i]) / std::fabs(a[i] - 0.1 * (i + 1)), 1e-6);
}

TEST(Optimizer, DeterministicAndValidated) {
  OptimizerConfig c;
  auto s1 = OptimizerState::for_parameters(c, 2), s2 = s1;
  std::vector<double> p1{1.0, 2.0}, p2 = p1;
  step(c, s1, p1, std::vector<double>{0.4, 0.1});
  step(c, s2, p2, std::vector<double>{0.4, 0.1});
  EXPECT_EQ(p1, p2);
  EXPECT_EQ(s1, s2);
  std::vector<double> p{1.0};
  auto s = OptimizerState::for_parameters(c, 1);
  EXPECT_THROW(step(c, s, p, std::vector<double>{std::numeric_limits<double>::quiet_NaN()}), InvalidInput);
  OptimizerConfig bad;
  bad.learning_rate = -1.0;
  EXPECT_THROW(bad.validate(), InvalidInput);
}
