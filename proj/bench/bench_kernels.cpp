// Serial reference kernels against their OpenMP counterparts on square grids.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "exprelax/kernels.hpp"

using namespace exprelax::kernels;

namespace {

struct Workspace {
  Layout L;
  std::vector<double> f, gx, gy, sq, fx, fy, div;

  explicit Workspace(int n) {
    L.nx = n;
    L.ny = n;
    L.hx = 1.0 / n;
    L.hy = 1.0 / n;
    L.two_d = true;
    const std::size_t cells = static_cast<std::size_t>(n) * n;
    f.resize(cells);
    gx.resize(static_cast<std::size_t>(n + 1) * n);
    gy.resize(static_cast<std::size_t>(n) * (n + 1));
    sq.resize(cells * L.quadrants_per_cell());
    fx.resize(gx.size());
    fy.resize(gy.size());
    div.resize(cells);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d(0.0, 1.0);
    for (double& v : f) v = d(rng);
  }
};

template <bool Parallel>
void p_laplacian_pipeline(benchmark::State& state) {
  Workspace w(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::face_gradient(w.L, w.f, w.gx, w.gy);
      parallel::quadrant_norms(w.L, w.gx, w.gy, w.sq);
      parallel::p_flux(w.L, w.gx, w.gy, w.sq, 1.5, 1e-8, w.fx, w.fy);
      parallel::divergence(w.L, w.fx, w.fy, w.div);
    } else {
      serial::face_gradient(w.L, w.f, w.gx, w.gy);
      serial::quadrant_norms(w.L, w.gx, w.gy, w.sq);
      serial::p_flux(w.L, w.gx, w.gy, w.sq, 1.5, 1e-8, w.fx, w.fy);
      serial::divergence(w.L, w.fx, w.fy, w.div);
    }
    benchmark::DoNotOptimize(w.div.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void flux_only(benchmark::State& state) {
  Workspace w(static_cast<int>(state.range(0)));
  serial::face_gradient(w.L, w.f, w.gx, w.gy);
  serial::quadrant_norms(w.L, w.gx, w.gy, w.sq);
  for (auto _ : state) {
    if constexpr (Parallel)
      parallel::p_flux(w.L, w.gx, w.gy, w.sq, 1.5, 1e-8, w.fx, w.fy);
    else
      serial::p_flux(w.L, w.gx, w.gy, w.sq, 1.5, 1e-8, w.fx, w.fy);
    benchmark::DoNotOptimize(w.fx.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(p_laplacian_pipeline<false>)->Name("pipeline/serial")->RangeMultiplier(4)->Range(64, 1024)->UseRealTime();
BENCHMARK(p_laplacian_pipeline<true>)->Name("pipeline/parallel")->RangeMultiplier(4)->Range(64, 1024)->UseRealTime();
BENCHMARK(flux_only<false>)->Name("p_flux/serial")->RangeMultiplier(4)->Range(64, 1024)->UseRealTime();
BENCHMARK(flux_only<true>)->Name("p_flux/parallel")->RangeMultiplier(4)->Range(64, 1024)->UseRealTime();

BENCHMARK_MAIN();
