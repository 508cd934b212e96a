#pragma once

// Helpers shared by the test binaries. The quadrature routines integrate the
// raw densities exp(theta x + b x^2) directly and do not call into the
// library's closed forms, so they serve as independent oracles.

#include "maxent/exponential_family.hpp"
#include "maxent/numerics.hpp"
#include "maxent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace maxent::testing {

inline Matrix gaussian_matrix(Eigen::Index n, Eigen::Index m, RngStream& rng, double scale = 1.0) {
  Matrix w(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) w(i, j) = scale * rng.normal();
  }
  return w;
}

inline Matrix orthonormal_columns(Eigen::Index n, Eigen::Index m, RngStream& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, m, rng));
  return qr.householderQ() * Matrix::Identity(n, m);
}

/// Composite Simpson on [a, b] with `intervals` (even) sub-intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals = 20000) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * i);
  return s * h / 3.0;
}

struct LawMoments {
  double mass;
  double mean;
  double variance;
};

/// Mean and variance of exp(theta x + b x^2) over the kind's support by
/// brute-force quadrature.
inline LawMoments quadrature_moments(ActivationKind kind, double theta) {
  double a = 0.0;
  double b = 1.0;
  double quad = 0.0;
  switch (kind) {
    case ActivationKind::ted:
      break;
    case ActivationKind::tg:
      quad = -0.5;
      b = std::max(theta, 0.0) + 40.0;
      break;
    case ActivationKind::exp:
      b = 80.0 / -theta;
      break;
    case ActivationKind::linear:
      quad = -0.5;
      a = theta - 40.0;
      b = theta + 40.0;
      break;
  }
  // Shift the exponent by its maximum over [a, b] to avoid overflow.
  double peak = -1e300;
  for (int i = 0; i <= 1000; ++i) {
    const double x = a + (b - a) * i / 1000.0;
    peak = std::max(peak, theta * x + quad * x * x);
  }
  auto density = [&](double x) { return std::exp(theta * x + quad * x * x - peak); };
  const double mass = simpson(density, a, b, 200000);
  const double mean = simpson([&](double x) { return x * density(x); }, a, b, 200000) / mass;
  const double var =
      simpson([&](double x) { return (x - mean) * (x - mean) * density(x); }, a, b, 200000) / mass;
  return {mass, mean, var};
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Asymptotic 1% critical value of the KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace maxent::testing
