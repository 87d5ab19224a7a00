#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "lloydcvt/hessian.hpp"
#include "lloydcvt/lloyd.hpp"
#include "lloydcvt/measure.hpp"
#include "lloydcvt/voronoi.hpp"

using namespace lloydcvt;

namespace {

Grid linspace_grid(std::size_t n, double lo, double hi) {
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i)
    pts[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return Grid(1, std::move(pts));
}

void BM_lloyd_step_exact(benchmark::State& state) {
  Dist d = gaussian({0.0}, {1.0});
  Grid g = linspace_grid(static_cast<std::size_t>(state.range(0)), -2.0, 2.0);
  Backend b = Backend::exact1d();
  for (auto _ : state) {
    StepResult st = lloyd_step(g, d, b);
    benchmark::DoNotOptimize(st.gap);
  }
}
BENCHMARK(BM_lloyd_step_exact)->Arg(4)->Arg(16)->Arg(64);

void BM_cell_stats_mc(benchmark::State& state) {
  Dist d = gaussian({0.0}, {1.0});
  Grid g = linspace_grid(16, -2.0, 2.0);
  Backend b = Backend::mc(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    CellStats st = cell_stats(g, d, b);
    benchmark::DoNotOptimize(st.mass.data());
  }
}
BENCHMARK(BM_cell_stats_mc)->Arg(10000)->Arg(100000);

void BM_nearest_index(benchmark::State& state) {
  Grid g = linspace_grid(static_cast<std::size_t>(state.range(0)), -2.0, 2.0);
  double q = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nearest_index(g, &q));
    q = -q;
  }
}
BENCHMARK(BM_nearest_index)->Arg(8)->Arg(64)->Arg(512);

void BM_hessian_1d(benchmark::State& state) {
  Dist d = gaussian({0.0}, {1.0});
  Grid g = linspace_grid(static_cast<std::size_t>(state.range(0)), -2.0, 2.0);
  for (auto _ : state) {
    HessianReport rep = hessian_1d(g, d);
    benchmark::DoNotOptimize(rep.eigenvalues.data());
  }
}
BENCHMARK(BM_hessian_1d)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
