#pragma once

// Data-parallel kernels. Each takes an Execution policy: Execution::serial
// is the reference loop, Execution::parallel the OpenMP loop. Both produce
// bit-identical results because every item owns its state (and its random
// stream) and results are stored by item index.

#include "maxent/execution.hpp"
#include "maxent/gamma_inverse.hpp"
#include "maxent/manifold_sampler.hpp"

#include <cstdint>
#include <vector>

namespace maxent {

/// gamma_inverse for every row of z_rows.
std::vector<SaddleSolution> batch_gamma_inverse(const LayerMap& map, const Matrix& z_rows,
                                                const SolverConfig& cfg, Execution exec);

/// Elementwise mean function over a matrix of natural parameters.
Matrix batch_mean_lambda(ActivationKind kind, const Matrix& theta, Execution exec);

/// `chains` independent chains on one manifold, chain c drawing from
/// RngStream(seed, c). Results are indexed by chain.
std::vector<Matrix> run_chains(const LayerMap& map, const Vector& z, const Vector& x0,
                               const ChainSchedule& schedule, std::uint64_t seed,
                               std::size_t chains, Execution exec);

/// Rows of all chains stacked in chain order.
Matrix stack_rows(const std::vector<Matrix>& blocks);

}  // namespace maxent
