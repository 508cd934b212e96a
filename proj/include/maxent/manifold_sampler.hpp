#pragma once

#include "maxent/gamma_inverse.hpp"
#include "maxent/rng.hpp"

#include <cstddef>
#include <memory>

namespace maxent {

/// Open interval (lo, hi) of line parameters t with x + t d inside the support.
/// Unbounded ends are +-infinity.
struct Segment {
  double lo;
  double hi;
};

/// Throws BoundaryState when x is not strictly interior, InvalidInput when
/// the direction is zero.
Segment feasible_segment(const Vector& x, const Vector& direction, Support support);

/// Fixed data shared by all chains on one manifold M(z) = {x : W'x = z}.
struct ManifoldGeometry {
  LayerMap map;
  Vector z;
  Matrix basis;   ///< null-space basis B of W'
  Cholesky gram;  ///< factor of W'W, used for drift re-projection

  ManifoldGeometry(LayerMap map, Vector z);
};

struct ChainSchedule {
  std::size_t burn_in = 1000;
  std::size_t n_samples = 1000;
  std::size_t thin = 1;
};

/// A point on M(z) strictly inside the prior's support, plus its random stream.
class ChainState {
 public:
  /// Throws InfeasibleStart when W'x0 != z (to 1e-9, scaled by max(1, |z|_inf))
  /// or x0 is not strictly interior.
  ChainState(std::shared_ptr<const ManifoldGeometry> geometry, Vector x0, RngStream rng);

  const Vector& x() const { return x_; }
  const ManifoldGeometry& geometry() const { return *geometry_; }
  std::size_t steps_taken() const { return steps_; }
  RngStream& rng() { return rng_; }

  /// One sweep over the null-space columns in order (one coordinate
  /// update per column). Every 1000 sweeps x is projected back onto M(z).
  void sweep();

 private:
  void update_along(Eigen::Index column);
  void reproject();

  std::shared_ptr<const ManifoldGeometry> geometry_;
  Vector x_;
  RngStream rng_;
  std::size_t steps_ = 0;
};

inline constexpr std::size_t kReprojectEvery = 1000;

void hit_and_run_step(ChainState& state);

/// The surrogate mean x_hat from gamma_inverse, checked to be a valid start.
/// Throws InfeasibleStart when the solve fails or x_hat is not interior.
Vector default_start(const LayerMap& map, const Vector& z, const SolverConfig& cfg = {});

/// Samples of p(x | z) as rows (n_samples x N). The linear kind is sampled in
/// closed form by gaussian_manifold_sample; x0 is then only validated.
Matrix run_chain(const LayerMap& map, const Vector& z, const Vector& x0,
                 const ChainSchedule& schedule, RngStream& rng);

/// x_bar + B u with u ~ N(0, I): exact posterior draws for the linear kind.
Matrix gaussian_manifold_sample(const LayerMap& map, const Vector& z, RngStream& rng, std::size_t n);

/// Brute-force E[x | W'x = z] under the prior, by grid quadrature over the
/// null-space coordinates. Requires N - M <= 2; throws OracleUnavailable
/// otherwise or when the feasible set is empty.
Vector conditional_mean_oracle(const LayerMap& map, const Vector& z, std::size_t grid_points = 2001);

}  // namespace maxent
