#pragma once

#include "maxent/exponential_family.hpp"
#include "maxent/numerics.hpp"

#include <cstddef>

namespace maxent {

/// One dimension-reducing layer: z = W'x with x governed by the prior of
/// `kind` at natural parameters theta0 (one per input coordinate).
class LayerMap {
 public:
  /// theta0 defaults to the kind's prior parameter on every coordinate.
  LayerMap(Matrix w, ActivationKind kind);
  LayerMap(Matrix w, ActivationKind kind, Vector theta0);

  const Matrix& w() const { return w_; }
  ActivationKind kind() const { return kind_; }
  const Vector& theta0() const { return theta0_; }
  std::size_t input_dim() const { return static_cast<std::size_t>(w_.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(w_.cols()); }

  /// theta0 + W h.
  Vector natural_params(const Vector& h) const;

 private:
  Matrix w_;
  ActivationKind kind_;
  Vector theta0_;
};

struct SolverConfig {
  double tol = 1e-10;                       ///< on ||W' lambda - z||_inf
  std::size_t max_iter = 200;
  double initial_damping = 1.0;             ///< first trial step length of each Newton step
  double domain_backtrack_fraction = 0.9;   ///< exp kind: fraction of the distance to theta = 0
  double divergence_bound = 1e8;            ///< ||h||_inf beyond this means z is off the image
};

struct SaddleSolution {
  Vector h;
  Vector x_hat;
  double residual_inf = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Elementwise lambda / lambda' over a parameter vector. Throws DomainViolation
/// naming the first offending coordinate.
Vector mean_vector(ActivationKind kind, const Vector& theta);
Vector prime_vector(ActivationKind kind, const Vector& theta);

/// gamma(h) = W' lambda(theta0 + W h).
Vector gamma(const LayerMap& map, const Vector& h);

/// Solves W' lambda(theta0 + W h) = z for h by damped Newton with the exact
/// Jacobian W' diag(lambda') W.
///
/// Non-convergence is reported through `converged == false` rather than an
/// exception: it happens when z lies on or beyond the boundary of the image
/// of gamma. Non-finite or mis-sized z throws InvalidInput.
SaddleSolution gamma_inverse(const LayerMap& map, const Vector& z, const SolverConfig& cfg = {});

struct SolutionJacobians {
  Matrix dh_dz;     ///< M x M, (W' D W)^{-1}
  Matrix dxhat_dz;  ///< N x M, D W (W' D W)^{-1}
};

SolutionJacobians solution_jacobians(const LayerMap& map, const SaddleSolution& sol);

/// dxhat_dz' * cotangent, without forming the N x M Jacobian.
Vector vjp_through_inverse(const LayerMap& map, const SaddleSolution& sol,
                           const Vector& cotangent_on_xhat);

/// Quantities at a solution that both Jacobian routines and network
/// back-propagation need.
struct Linearization {
  Vector theta;
  Vector lambda;
  Vector dlambda;
  Cholesky normal;  ///< factor of W' diag(dlambda) W

  Linearization(const LayerMap& map, const Vector& h);
};

}  // namespace maxent
