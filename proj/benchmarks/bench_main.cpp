#include <benchmark/benchmark.h>

#include <vector>

#include "fastrate/conditions.hpp"
#include "fastrate/mi.hpp"
#include "fastrate/montecarlo.hpp"
#include "fastrate/problems.hpp"
#include "fastrate/random.hpp"

using namespace fastrate;

namespace {

void BM_run_replicates(benchmark::State& state) {
  GaussianMeanProblem p(0.0, 1.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    ReplicateSet rs = run_replicates(p, n, 500, 1);
    benchmark::DoNotOptimize(rs.product_r.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 500 * n);
}
BENCHMARK(BM_run_replicates)->Arg(100)->Arg(400);

void BM_ksg_mi(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  Matrix x(m, 1), y(m, 1);
  Stream rng(7, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const double a = rng.next_gaussian();
    x.at(i, 0) = a;
    y.at(i, 0) = 0.6 * a + 0.8 * rng.next_gaussian();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(ksg_mi(x, y).value);
  }
}
BENCHMARK(BM_ksg_mi)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_estimate_cgf(benchmark::State& state) {
  Stream rng(3, 0);
  std::vector<double> r(100000);
  for (double& v : r) v = 0.01 + 0.2 * rng.next_gaussian();
  const std::vector<double> grid = default_eta_grid(r);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_cgf(r, grid).lambda_vals.data());
  }
}
BENCHMARK(BM_estimate_cgf)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
