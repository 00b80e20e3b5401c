#include <benchmark/benchmark.h>

#include "cemdc/spectral.hpp"

using namespace cemdc;

namespace {

// one local pencil at increasing refinement ratios; the dense eigensolve
// dominates the offline stage at small H / large H-to-h ratio
void BM_LocalEigensolve(benchmark::State& state) {
  const int ratio = static_cast<int>(state.range(0));
  GridHierarchy hier = GridHierarchy::with_fine(unit_square(), 8, 8 * ratio);
  MediaField media = generate_channelized(hier, experiment_channel_spec(), 1e4,
                                          Physics{1.0, 1.0, {1.0, 1.0}});
  PartitionOfUnity pou(hier);
  const int elem = hier.coarse_elem_id(4, 4);
  for (auto _ : state) {
    ElementSpectrum es = local_eigensolve(hier, media, pou, elem, 7);
    benchmark::DoNotOptimize(es.eigenvalues[6]);
  }
  state.counters["pencil_dim"] = 2.0 * (ratio + 1) * (ratio + 1);
}
BENCHMARK(BM_LocalEigensolve)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_AuxiliarySpace(benchmark::State& state) {
  const int n_coarse = static_cast<int>(state.range(0));
  GridHierarchy hier = GridHierarchy::with_fine(unit_square(), n_coarse, 128);
  MediaField media = generate_channelized(hier, experiment_channel_spec(), 1e4,
                                          Physics{1.0, 1.0, {1.0, 1.0}});
  PartitionOfUnity pou(hier);
  for (auto _ : state) {
    AuxiliarySpace aux = build_auxiliary_space(hier, media, pou, 6, 1, 2);
    benchmark::DoNotOptimize(aux.lambda_min_discarded());
  }
}
BENCHMARK(BM_AuxiliarySpace)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
