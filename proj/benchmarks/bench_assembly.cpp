#include <benchmark/benchmark.h>

#include "cemdc/assembly.hpp"

using namespace cemdc;

namespace {

MediaField bench_media(const GridHierarchy& hier) {
  return generate_channelized(hier, experiment_channel_spec(), 1e4, Physics{1.0, 1.0, {1.0, 1.0}});
}

void BM_GlobalAQ(benchmark::State& state) {
  const int n_fine = static_cast<int>(state.range(0));
  GridHierarchy hier = GridHierarchy::with_fine(unit_square(), 8, n_fine);
  MediaField media = bench_media(hier);
  for (auto _ : state) {
    SparseOperator aq = assemble_a_q(hier, media);
    benchmark::DoNotOptimize(aq.matrix.nonZeros());
  }
  state.SetComplexityN(n_fine * n_fine);
}
BENCHMARK(BM_GlobalAQ)->Arg(64)->Arg(128)->Arg(256)->Complexity(benchmark::oN);

void BM_WeightedMass(benchmark::State& state) {
  const int n_fine = static_cast<int>(state.range(0));
  GridHierarchy hier = GridHierarchy::with_fine(unit_square(), 8, n_fine);
  MediaField media = bench_media(hier);
  PartitionOfUnity pou(hier);
  for (auto _ : state) {
    SparseOperator s = assemble_weighted_mass_s(hier, media, pou);
    benchmark::DoNotOptimize(s.matrix.nonZeros());
  }
}
BENCHMARK(BM_WeightedMass)->Arg(64)->Arg(128)->Arg(256);

void BM_PatchAQ(benchmark::State& state) {
  GridHierarchy hier = GridHierarchy::with_fine(unit_square(), 16, 128);
  MediaField media = bench_media(hier);
  Patch patch = oversample(hier, hier.coarse_elem_id(8, 8), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SparseOperator aq = assemble_a_q(hier, media, &patch);
    benchmark::DoNotOptimize(aq.matrix.nonZeros());
  }
}
BENCHMARK(BM_PatchAQ)->Arg(2)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
