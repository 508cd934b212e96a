#include "maxent/gamma_inverse.hpp"

#include "maxent/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxent {

namespace {

constexpr int kMaxHalvings = 60;

Matrix weighted_gram(const Matrix& w, const Vector& d) {
  return w.transpose() * d.asDiagonal() * w;
}

// Largest t with theta + t * dtheta < 0 everywhere, or +inf.
double distance_to_exp_boundary(const Vector& theta, const Vector& dtheta) {
  double t_max = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (dtheta[i] > 0.0) t_max = std::min(t_max, -theta[i] / dtheta[i]);
  }
  return t_max;
}

}  // namespace

LayerMap::LayerMap(Matrix w, ActivationKind kind)
    : LayerMap(std::move(w), kind, Vector()) {}

LayerMap::LayerMap(Matrix w, ActivationKind kind, Vector theta0)
    : w_(std::move(w)), kind_(kind), theta0_(std::move(theta0)) {
  if (w_.rows() == 0 || w_.cols() == 0 || w_.cols() > w_.rows()) {
    throw InvalidInput("LayerMap: W must be N x M with 0 < M <= N");
  }
  if (!w_.allFinite()) throw InvalidInput("LayerMap: W has non-finite entries");
  if (theta0_.size() == 0) {
    theta0_ = Vector::Constant(w_.rows(), kind_info(kind_).theta0);
  }
  if (theta0_.size() != w_.rows()) {
    throw InvalidInput("LayerMap: theta0 length must equal the number of rows of W");
  }
  for (Eigen::Index i = 0; i < theta0_.size(); ++i) {
    if (!in_theta_domain(kind_, theta0_[i])) {
      throw DomainViolation("LayerMap: theta0 outside the kind's domain", static_cast<std::size_t>(i));
    }
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(w_);
  qr.setThreshold(1e-10);
  if (qr.rank() < w_.cols()) {
    throw RankDeficient(static_cast<std::size_t>(qr.rank()), static_cast<std::size_t>(w_.cols()));
  }
}

Vector LayerMap::natural_params(const Vector& h) const { return theta0_ + w_ * h; }

Vector mean_vector(ActivationKind kind, const Vector& theta) {
  Vector out(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!in_theta_domain(kind, theta[i])) {
      throw DomainViolation("natural parameter outside the domain", static_cast<std::size_t>(i));
    }
    out[i] = mean_lambda(kind, theta[i]);
  }
  return out;
}

Vector prime_vector(ActivationKind kind, const Vector& theta) {
  Vector out(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!in_theta_domain(kind, theta[i])) {
      throw DomainViolation("natural parameter outside the domain", static_cast<std::size_t>(i));
    }
    out[i] = lambda_prime(kind, theta[i]);
  }
  return out;
}

Vector gamma(const LayerMap& map, const Vector& h) {
  if (static_cast<std::size_t>(h.size()) != map.feature_dim()) {
    throw InvalidInput("gamma: h has the wrong length");
  }
  return map.w().transpose() * mean_vector(map.kind(), map.natural_params(h));
}

SaddleSolution gamma_inverse(const LayerMap& map, const Vector& z, const SolverConfig& cfg) {
  if (static_cast<std::size_t>(z.size()) != map.feature_dim()) {
    throw InvalidInput("gamma_inverse: z has the wrong length");
  }
  if (!z.allFinite()) throw InvalidInput("gamma_inverse: z has non-finite entries");
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1) throw InvalidInput("gamma_inverse: bad solver config");

  const Matrix& w = map.w();
  const ActivationKind kind = map.kind();
  const bool guard_domain = kind == ActivationKind::exp;

  // First-order start: exact for the linear kind.
  const Vector lambda0 = mean_vector(kind, map.theta0());
  const double mean_slope = prime_vector(kind, map.theta0()).mean();
  Vector h = spd_solve(w.transpose() * w, z - w.transpose() * lambda0) / mean_slope;
  if (guard_domain) {
    const double t_max = distance_to_exp_boundary(map.theta0(), w * h);
    if (t_max <= 1.0) h *= cfg.domain_backtrack_fraction * t_max;
  }

  SaddleSolution sol;
  Vector theta = map.natural_params(h);
  Vector lambda = mean_vector(kind, theta);
  Vector f = w.transpose() * lambda - z;

  for (;;) {
    sol.residual_inf = f.lpNorm<Eigen::Infinity>();
    if (sol.residual_inf <= cfg.tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= cfg.max_iter) break;

    Vector step;
    try {
      step = Cholesky(weighted_gram(w, prime_vector(kind, theta))).solve(Vector(-f));
    } catch (const NotPositiveDefinite&) {
      break;
    }

    const Vector dtheta = w * step;
    double t = cfg.initial_damping;
    if (guard_domain) {
      const double t_max = distance_to_exp_boundary(theta, dtheta);
      if (t >= t_max) t = cfg.domain_backtrack_fraction * t_max;
    }

    const double norm = f.norm();
    bool accepted = false;
    for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
      const Vector theta_try = theta + t * dtheta;
      const Vector lambda_try = mean_vector(kind, theta_try);
      Vector f_try = w.transpose() * lambda_try - z;
      if (f_try.allFinite() && f_try.norm() < norm) {
        h += t * step;
        theta = theta_try;
        lambda = lambda_try;
        f = std::move(f_try);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++sol.iterations;
    if (h.lpNorm<Eigen::Infinity>() > cfg.divergence_bound) {
      sol.residual_inf = f.lpNorm<Eigen::Infinity>();
      break;
    }
  }

  sol.h = std::move(h);
  sol.x_hat = std::move(lambda);
  return sol;
}

Linearization::Linearization(const LayerMap& map, const Vector& h)
    : theta(map.natural_params(h)),
      lambda(mean_vector(map.kind(), theta)),
      dlambda(prime_vector(map.kind(), theta)),
      normal(weighted_gram(map.w(), dlambda)) {}

SolutionJacobians solution_jacobians(const LayerMap& map, const SaddleSolution& sol) {
  if (!sol.converged) throw InvalidInput("solution_jacobians: solution did not converge");
  const Linearization lin(map, sol.h);
  SolutionJacobians out;
  out.dh_dz = lin.normal.inverse();
  out.dxhat_dz = lin.dlambda.asDiagonal() * map.w() * out.dh_dz;
  return out;
}

Vector vjp_through_inverse(const LayerMap& map, const SaddleSolution& sol,
                           const Vector& cotangent_on_xhat) {
  if (!sol.converged) throw InvalidInput("vjp_through_inverse: solution did not converge");
  if (static_cast<std::size_t>(cotangent_on_xhat.size()) != map.input_dim()) {
    throw InvalidInput("vjp_through_inverse: cotangent has the wrong length");
  }
  const Linearization lin(map, sol.h);
  return lin.normal.solve(Vector(map.w().transpose() * lin.dlambda.cwiseProduct(cotangent_on_xhat)));
}

}  // namespace maxent
