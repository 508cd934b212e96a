// Serial reference vs OpenMP loops for the batch kernels. The second
// benchmark argument selects the policy: 0 serial, 1 parallel. Times are
// wall-clock; set OMP_NUM_THREADS to control the parallel path.

#include "maxent/batch.hpp"
#include "maxent/pbn.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace maxent;

namespace {

Execution policy(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::serial : Execution::parallel;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, RngStream& rng, double scale) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  }
  return m;
}

Matrix tg_rows(Eigen::Index rows, Eigen::Index n, RngStream& rng) {
  Matrix x(rows, n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index i = 0; i < n; ++i) x(r, i) = sample_univariate({ActivationKind::tg, 0.0}, rng);
  }
  return x;
}

void BM_BatchGammaInverse(benchmark::State& state) {
  RngStream rng(1);
  const Eigen::Index n = state.range(0);
  const Matrix w = gaussian(n, n / 4, rng, 1.0 / std::sqrt(static_cast<double>(n)));
  const LayerMap map(w, ActivationKind::tg);
  const Matrix z = tg_rows(256, n, rng) * w;
  for (auto _ : state) benchmark::DoNotOptimize(batch_gamma_inverse(map, z, {}, policy(state)));
  state.SetItemsProcessed(state.iterations() * z.rows());
}
BENCHMARK(BM_BatchGammaInverse)->ArgsProduct({{32, 128}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_RunChains(benchmark::State& state) {
  RngStream rng(2);
  const Eigen::Index n = state.range(0);
  const Matrix w = gaussian(n, 2, rng, 1.0 / std::sqrt(static_cast<double>(n)));
  const LayerMap map(w, ActivationKind::ted);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform();
  const Vector z = w.transpose() * x;
  const Vector x0 = default_start(map, z);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_chains(map, z, x0, {100, 2000, 1}, 7, 8, policy(state)));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_RunChains)->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_LossGradient(benchmark::State& state) {
  RngStream rng(3);
  const Eigen::Index n = state.range(0);
  const PbnNetwork net =
      random_network({static_cast<std::size_t>(n), static_cast<std::size_t>(n / 2), static_cast<std::size_t>(n / 4)},
                     {ActivationKind::linear, ActivationKind::tg}, rng);
  const Matrix data = gaussian(256, n, rng, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(loss_gradient(net, data, {}, policy(state)));
  state.SetItemsProcessed(state.iterations() * data.rows());
}
BENCHMARK(BM_LossGradient)->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
