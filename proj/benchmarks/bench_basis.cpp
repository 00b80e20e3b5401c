#include <benchmark/benchmark.h>

#include "cemdc/basis.hpp"

using namespace cemdc;

namespace {

struct BasisBench {
  GridHierarchy hier;
  MediaField media;
  PartitionOfUnity pou;
  AuxiliarySpace aux;

  BasisBench(int n_coarse, int n_fine)
      : hier(GridHierarchy::with_fine(unit_square(), n_coarse, n_fine)),
        media(generate_channelized(hier, experiment_channel_spec(), 1e4,
                                   Physics{1.0, 1.0, {1.0, 1.0}})),
        pou(hier),
        aux(build_auxiliary_space(hier, media, pou, 6, 1, 2)) {}
};

// saddle factorization plus six solves for one element, the offline hot loop
void BM_ElementBasis(benchmark::State& state) {
  static BasisBench bench(16, 128);
  const int m = static_cast<int>(state.range(0));
  const int elem = bench.hier.coarse_elem_id(8, 8);
  for (auto _ : state) {
    ElementBasis eb = build_element_basis(bench.hier, bench.media, bench.aux, elem, m);
    benchmark::DoNotOptimize(eb.values.norm());
  }
}
BENCHMARK(BM_ElementBasis)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

// Galerkin Gram assembly over the rectangle-overlap blocks
void BM_CoarseGram(benchmark::State& state) {
  static BasisBench bench(16, 128);
  static CoarseSpace space = assemble_coarse_space(bench.hier, bench.media, bench.aux, 4,
                                                   BasisOptions{.threads = 2});
  SparseOperator aq = assemble_a_q(bench.hier, bench.media);
  for (auto _ : state) {
    Eigen::MatrixXd G = space.gram(aq, 2);
    benchmark::DoNotOptimize(G(0, 0));
  }
}
BENCHMARK(BM_CoarseGram)->Unit(benchmark::kMillisecond);

}  // namespace
