#include <benchmark/benchmark.h>

#include "spikemix/oracle.hpp"
#include "spikemix/simgen.hpp"
#include "spikemix/smc.hpp"

namespace {

using namespace spikemix;

// One post-onset series of an excited, sustained synthetic neuron.
const SeriesObservations& fixture() {
  static const SeriesObservations series = generate_synthetic(SimConfig{}, 7).observations(0);
  return series;
}

void BM_Bpf(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  Rng rng(1);
  const ClusterParams theta{1.0, -10.0};
  for (auto _ : state) benchmark::DoNotOptimize(bpf(fixture(), theta, S, rng).estimate);
}
BENCHMARK(BM_Bpf)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Csmc(benchmark::State& state) {
  const CsmcOptions opts{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), false};
  const ClusterParams theta{1.0, -10.0};
  std::uint64_t stream = 0;
  for (auto _ : state) benchmark::DoNotOptimize(csmc(fixture(), theta, opts, ++stream).estimate);
}
BENCHMARK(BM_Csmc)->Args({64, 3})->Args({64, 1})->Args({32, 3})->Unit(benchmark::kMillisecond);

void BM_GridLoglik(benchmark::State& state) {
  SeriesObservations toy;
  toy.counts = {5, 9, 7, 8, 6};
  toy.config = {-3.0, 1e-10, 225, 5};
  const ClusterParams theta{1.0, -4.0};
  const GridSpec grid = default_grid(toy, theta, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grid_loglik(toy, theta, grid));
}
BENCHMARK(BM_GridLoglik)->Arg(501)->Arg(2001)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
