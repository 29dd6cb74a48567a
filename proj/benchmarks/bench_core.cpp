#include <complex>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "svx/kernels.hpp"
#include "svx/opfft.hpp"
#include "svx/precond.hpp"
#include "svx/tucker.hpp"
#include "svx/voxgrid.hpp"

namespace {

using namespace svx;

VoxelGrid cube(Index n) {
  GeometrySpec g;
  g.domain = {n, n, n};
  g.dx = 1e-6;
  g.materials = {Material{"cu", 5.8e7}};
  g.boxes = {{{0, 0, 0}, {n - 1, n - 1, n - 1}, 0}};
  return VoxelGrid::build(g);
}

void BM_AssembleToeplitz(benchmark::State& state) {
  const Index n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_toeplitz({n, n, n}));
  state.SetComplexityN(n * n * n);
}
BENCHMARK(BM_AssembleToeplitz)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ApplyZ(benchmark::State& state) {
  const Index n = state.range(0);
  const auto grid = cube(n);
  const CirculantKernels kernels(assemble_toeplitz(grid.dims(), grid.dx()), {state.range(1) != 0, 1e-8});
  const CirculantOperator op(kernels, grid, 2e9 * 3.141592653589793);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<cplx> x(static_cast<std::size_t>(op.current_size())), y(x.size());
  for (auto& v : x) v = {d(rng), d(rng)};
  for (auto _ : state) {
    op.apply_Z(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetComplexityN(n * n * n);
}
BENCHMARK(BM_ApplyZ)
    ->ArgsProduct({{8, 16, 32}, {0, 1}})
    ->ArgNames({"n", "tucker"})
    ->Unit(benchmark::kMillisecond);

void BM_TuckerSvd(benchmark::State& state) {
  const Index n = state.range(0);
  const CirculantKernels kernels(assemble_toeplitz({n, n, n}));
  Array3<cplx> spec(kernels.padded_dims());
  kernels.spectrum(BlockId::XX, spec.data());
  for (auto _ : state) benchmark::DoNotOptimize(tucker_svd(spec, 1e-8));
}
BENCHMARK(BM_TuckerSvd)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SchurSetup(benchmark::State& state) {
  const Index n = state.range(0);
  const auto grid = cube(n);
  const NodeIndex nodes(grid);
  const auto A = build_incidence(grid, nodes).matrix;
  const CirculantKernels kernels(assemble_toeplitz(grid.dims(), grid.dx()));
  const CirculantOperator op(kernels, grid, 2e9 * 3.141592653589793);
  const auto kind = state.range(1) == 0 ? SchurKind::Direct : SchurKind::AmgCg;
  for (auto _ : state) benchmark::DoNotOptimize(SchurPreconditioner::from_operator(op, A, {kind}));
}
BENCHMARK(BM_SchurSetup)->ArgsProduct({{8, 16}, {0, 1}})->ArgNames({"n", "amg"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
