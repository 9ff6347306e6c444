#include <benchmark/benchmark.h>

#include <vector>

#include "confdiff/risk.hpp"
#include "confdiff/rng.hpp"

using namespace confdiff;

namespace {

struct Batch {
  std::vector<double> c;
  std::vector<PairScores> scores;
};

Batch make_batch(std::size_t n) {
  Rng rng(3);
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    b.c.push_back(rng.uniform(-1.0, 1.0));
    b.scores.push_back({rng.normal(), rng.normal()});
  }
  return b;
}

void BM_UnbiasedRisk(benchmark::State& state) {
  const Batch b = make_batch(static_cast<std::size_t>(state.range(0)));
  const ConfidenceBatch batch{b.c, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(confdiff_unbiased_risk(batch, b.scores, LossKind::logistic));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CorrectedRiskGrad(benchmark::State& state) {
  const Batch b = make_batch(static_cast<std::size_t>(state.range(0)));
  const ConfidenceBatch batch{b.c, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(corrected_risk_grad(batch, b.scores, LossKind::logistic, CorrectionKind::abs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_UnbiasedRisk)->Arg(256)->Arg(4096);
BENCHMARK(BM_CorrectedRiskGrad)->Arg(256)->Arg(4096);
