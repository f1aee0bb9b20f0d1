#include <benchmark/benchmark.h>

#include "pcomq/comq.hpp"
#include "pcomq/permute.hpp"
#include "pcomq/simgen.hpp"

namespace {

using namespace pcomq;

struct Layer {
  Matrix w;
  Matrix x;
};

Layer make_layer(std::size_t m, std::size_t n, std::size_t samples) {
  SimWeightParams wp;
  wp.m = m;
  wp.n = n;
  wp.seed = 1;
  SimCalibParams cp;
  cp.samples = samples;
  cp.features = m;
  cp.seed = 1;
  return {gen_weights(wp), gen_calibration(cp)};
}

QuantConfig config(Method method, int bits) {
  QuantConfig cfg;
  cfg.method = method;
  cfg.bits = bits;
  cfg.granularity = Granularity::block_wise(16);
  return cfg;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Layer l = make_layer(n, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(l.x, l.w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

void BM_Rtn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Layer l = make_layer(n, n, 1);
  const QuantConfig cfg = config(Method::RTN, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rtn_quantize_layer(l.w, cfg));
}
BENCHMARK(BM_Rtn)->Arg(64)->Arg(768);

void BM_ComqSweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Layer l = make_layer(n, n, 2 * n / 3 + 1);
  const QuantConfig cfg = config(Method::COMQ, 2);
  for (auto _ : state) {
    state.PauseTiming();
    ComqSolver solver(l.w, CalibrationView(l.x), cfg);
    state.ResumeTiming();
    solver.sweep();
    benchmark::DoNotOptimize(solver.current_loss());
  }
}
BENCHMARK(BM_ComqSweep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Quantize(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const Layer l = make_layer(64, 64, 256);
  const QuantConfig cfg = config(method, 2);
  for (auto _ : state) benchmark::DoNotOptimize(quantize(l.w, l.x, cfg));
  state.SetLabel(std::string(to_string(method)));
}
BENCHMARK(BM_Quantize)
    ->Arg(static_cast<int>(Method::COMQ))
    ->Arg(static_cast<int>(Method::PermutationCOMQ))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
