#include "maxent/batch.hpp"

#include "maxent/errors.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace maxent {

void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& fn) {
  if (exec == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<SaddleSolution> batch_gamma_inverse(const LayerMap& map, const Matrix& z_rows,
                                                const SolverConfig& cfg, Execution exec) {
  std::vector<SaddleSolution> out(static_cast<std::size_t>(z_rows.rows()));
  for_each_index(out.size(), exec, [&](std::size_t r) {
    out[r] = gamma_inverse(map, z_rows.row(static_cast<Eigen::Index>(r)).transpose(), cfg);
  });
  return out;
}

Matrix batch_mean_lambda(ActivationKind kind, const Matrix& theta, Execution exec) {
  Matrix out(theta.rows(), theta.cols());
  const auto rows = static_cast<std::size_t>(theta.rows());
  for_each_index(rows, exec, [&](std::size_t r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (Eigen::Index j = 0; j < theta.cols(); ++j) out(i, j) = mean_lambda(kind, theta(i, j));
  });
  return out;
}

std::vector<Matrix> run_chains(const LayerMap& map, const Vector& z, const Vector& x0,
                               const ChainSchedule& schedule, std::uint64_t seed,
                               std::size_t chains, Execution exec) {
  if (chains == 0) throw InvalidInput("run_chains: need at least one chain");
  std::vector<Matrix> out(chains);
  for_each_index(chains, exec, [&](std::size_t c) {
    RngStream rng(seed, c);
    out[c] = run_chain(map, z, x0, schedule, rng);
  });
  return out;
}

Matrix stack_rows(const std::vector<Matrix>& blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = blocks.empty() ? 0 : blocks.front().cols();
  for (const auto& b : blocks) rows += b.rows();
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace maxent
