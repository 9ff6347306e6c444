#include <benchmark/benchmark.h>

#include "confdiff/data_synth.hpp"
#include "confdiff/trainer.hpp"

using namespace confdiff;

namespace {

// One epoch over n pairs, including the per-epoch risk and accuracy evaluation.
void BM_TrainEpoch(benchmark::State& state, ModelKind kind) {
  const auto spec = GaussianMixtureSpec::isotropic({1.0, 1.0}, {-1.0, -1.0}, 1.0, 0.5);
  Rng rng(5);
  const ConfDiffDataset data = make_confdiff_dataset(spec, static_cast<std::size_t>(state.range(0)), rng);
  const auto test = make_labeled_dataset(spec, 1000, rng);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.eval_tail_epochs = 1;
  cfg.model.kind = kind;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, test, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_TrainEpoch, linear, ModelKind::linear)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainEpoch, mlp, ModelKind::mlp)->Arg(4000)->Unit(benchmark::kMillisecond);
