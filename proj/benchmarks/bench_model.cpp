#include <benchmark/benchmark.h>

#include "confdiff/model.hpp"
#include "confdiff/rng.hpp"

using namespace confdiff;

namespace {

ModelParams make_model(ModelKind kind) {
  ModelSpec spec;
  spec.kind = kind;
  spec.input_dim = 2;
  spec.init_seed = 1;
  return init_model(spec);
}

void BM_Forward(benchmark::State& state, ModelKind kind) {
  const ModelParams params = make_model(kind);
  const Vector x{0.3, -1.2};
  ForwardCache cache;
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, x, cache));
}

void BM_ForwardBackward(benchmark::State& state, ModelKind kind) {
  const ModelParams params = make_model(kind);
  const Vector x{0.3, -1.2};
  ForwardCache cache;
  Vector grad(params.parameter_count(), 0.0);
  for (auto _ : state) {
    forward(params, x, cache);
    backward(params, cache, 1.0, grad);
    benchmark::ClobberMemory();
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Forward, linear, ModelKind::linear);
BENCHMARK_CAPTURE(BM_Forward, mlp, ModelKind::mlp);
BENCHMARK_CAPTURE(BM_ForwardBackward, linear, ModelKind::linear);
BENCHMARK_CAPTURE(BM_ForwardBackward, mlp, ModelKind::mlp);
