#include "maxent/manifold_sampler.hpp"

#include "maxent/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kManifoldTol = 1e-9;
constexpr int kMaxRedraws = 100;

bool interior(ActivationKind kind, const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!in_support_interior(kind, x[i])) return false;
  }
  return true;
}

Matrix basis_for(const Matrix& w) {
  if (w.cols() == w.rows()) return Matrix(w.rows(), 0);
  return null_space_basis(w);
}

}  // namespace

Segment feasible_segment(const Vector& x, const Vector& direction, Support support) {
  if (x.size() != direction.size()) throw InvalidInput("feasible_segment: dimension mismatch");
  if (direction.lpNorm<Eigen::Infinity>() == 0.0) {
    throw InvalidInput("feasible_segment: zero direction");
  }
  Segment seg{-kInf, kInf};
  if (support == Support::real) return seg;

  const bool upper = support == Support::unit_interval;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (!(xi > 0.0) || (upper && !(xi < 1.0))) {
      throw BoundaryState("feasible_segment: point is not strictly inside the support");
    }
    const double di = direction[i];
    if (di > 0.0) {
      seg.lo = std::max(seg.lo, -xi / di);
      if (upper) seg.hi = std::min(seg.hi, (1.0 - xi) / di);
    } else if (di < 0.0) {
      seg.hi = std::min(seg.hi, -xi / di);
      if (upper) seg.lo = std::max(seg.lo, (1.0 - xi) / di);
    }
  }
  return seg;
}

ManifoldGeometry::ManifoldGeometry(LayerMap map_in, Vector z_in)
    : map(std::move(map_in)),
      z(std::move(z_in)),
      basis(basis_for(map.w())),
      gram(map.w().transpose() * map.w()) {
  if (static_cast<std::size_t>(z.size()) != map.feature_dim()) {
    throw InvalidInput("ManifoldGeometry: z has the wrong length");
  }
  if (!z.allFinite()) throw InvalidInput("ManifoldGeometry: z has non-finite entries");
}

ChainState::ChainState(std::shared_ptr<const ManifoldGeometry> geometry, Vector x0, RngStream rng)
    : geometry_(std::move(geometry)), x_(std::move(x0)), rng_(std::move(rng)) {
  const auto& g = *geometry_;
  if (static_cast<std::size_t>(x_.size()) != g.map.input_dim()) {
    throw InfeasibleStart("chain start has the wrong length");
  }
  const double scale = std::max(1.0, g.z.lpNorm<Eigen::Infinity>());
  const double off = (g.map.w().transpose() * x_ - g.z).lpNorm<Eigen::Infinity>();
  if (!(off <= kManifoldTol * scale)) {
    throw InfeasibleStart("chain start is not on the manifold W'x = z");
  }
  if (!interior(g.map.kind(), x_)) {
    throw InfeasibleStart("chain start is not strictly inside the support");
  }
}

void ChainState::update_along(Eigen::Index column) {
  const auto& g = *geometry_;
  const ActivationKind kind = g.map.kind();
  const Support support = kind_info(kind).support;

  const Vector b = g.basis.col(column);
  const double bn = b.norm();
  const Vector unit = b / bn;
  const Segment seg = feasible_segment(x_, unit, support);
  const double tilt = g.map.theta0().dot(unit);

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    double t = 0.0;
    switch (kind) {
      case ActivationKind::tg:
      case ActivationKind::linear: {
        // Line coordinate s = unit'x is N(tilt, 1) restricted to the segment.
        const double c = unit.dot(x_);
        const double s = tilt + sample_truncated_normal(c + seg.lo - tilt, c + seg.hi - tilt, rng_);
        t = s - c;
        break;
      }
      case ActivationKind::ted:
      case ActivationKind::exp:
        t = sample_truncated_exponential(-tilt, seg.lo, seg.hi, rng_);
        break;
    }
    Vector candidate = x_ + t * unit;
    if (interior(kind, candidate)) {
      x_ = std::move(candidate);
      return;
    }
  }
  throw BoundaryState("hit-and-run: could not draw an interior point along the segment");
}

void ChainState::reproject() {
  const auto& g = *geometry_;
  const Matrix& w = g.map.w();
  Vector candidate = x_ - w * g.gram.solve(Vector(w.transpose() * x_ - g.z));
  if (interior(g.map.kind(), candidate)) x_ = std::move(candidate);
}

void ChainState::sweep() {
  for (Eigen::Index j = 0; j < geometry_->basis.cols(); ++j) update_along(j);
  ++steps_;
  if (steps_ % kReprojectEvery == 0) reproject();
}

void hit_and_run_step(ChainState& state) { state.sweep(); }

Vector default_start(const LayerMap& map, const Vector& z, const SolverConfig& cfg) {
  const SaddleSolution sol = gamma_inverse(map, z, cfg);
  if (!sol.converged) throw InfeasibleStart("gamma inverse did not converge for the chain start");
  if (!interior(map.kind(), sol.x_hat)) {
    throw InfeasibleStart("surrogate mean is not strictly inside the support");
  }
  return sol.x_hat;
}

Matrix run_chain(const LayerMap& map, const Vector& z, const Vector& x0,
                 const ChainSchedule& schedule, RngStream& rng) {
  if (schedule.thin < 1) throw InvalidInput("run_chain: thin must be at least 1");
  if (map.kind() == ActivationKind::linear) {
    auto geometry = std::make_shared<const ManifoldGeometry>(map, z);
    ChainState check(geometry, x0, rng);
    return gaussian_manifold_sample(map, z, rng, schedule.n_samples);
  }

  auto geometry = std::make_shared<const ManifoldGeometry>(map, z);
  ChainState state(geometry, x0, rng);
  for (std::size_t i = 0; i < schedule.burn_in; ++i) state.sweep();

  Matrix samples(static_cast<Eigen::Index>(schedule.n_samples), x0.size());
  for (std::size_t s = 0; s < schedule.n_samples; ++s) {
    for (std::size_t k = 0; k < schedule.thin; ++k) state.sweep();
    samples.row(static_cast<Eigen::Index>(s)) = state.x().transpose();
  }
  rng = state.rng();
  return samples;
}

Matrix gaussian_manifold_sample(const LayerMap& map, const Vector& z, RngStream& rng, std::size_t n) {
  if (map.kind() != ActivationKind::linear) {
    throw InvalidInput("gaussian_manifold_sample: requires the linear kind");
  }
  const SaddleSolution sol = gamma_inverse(map, z);
  if (!sol.converged) throw InfeasibleStart("least-squares solve did not converge");
  const Matrix basis = basis_for(map.w());

  Matrix samples(static_cast<Eigen::Index>(n), sol.x_hat.size());
  Vector u(basis.cols());
  for (std::size_t s = 0; s < n; ++s) {
    for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = rng.normal();
    samples.row(static_cast<Eigen::Index>(s)) = (sol.x_hat + basis * u).transpose();
  }
  return samples;
}

}  // namespace maxent
