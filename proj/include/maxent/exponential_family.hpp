#pragma once

#include "maxent/rng.hpp"

#include <string_view>

namespace maxent {

/// Maximum-entropy prior / activation pairs.
///
/// Every kind is an exponential family with density proportional to
/// exp(theta * x + b * x^2) on its support:
///
///   kind    support   b      theta domain   prior theta0   mean lambda(theta)
///   ted     [0, 1]    0      R              0              e^t/(e^t - 1) - 1/t
///   tg      [0, inf)  -1/2   R              0              t + N(t)/Phi(t)
///   exp     [0, inf)  0      t < 0          -1             -1/t
///   linear  R         -1/2   R              0              t
enum class ActivationKind { ted, tg, exp, linear };

enum class Support { unit_interval, positive, real };

struct KindInfo {
  ActivationKind kind;
  std::string_view name;
  double quad_coeff;
  Support support;
  double theta0;
};

const KindInfo& kind_info(ActivationKind kind);
std::string_view to_string(ActivationKind kind);
/// Accepts "ted", "tg", "exp", "linear" (case-insensitive). Throws InvalidInput.
ActivationKind parse_kind(std::string_view name);

bool in_theta_domain(ActivationKind kind, double theta);
/// True when x lies strictly inside the kind's support.
bool in_support_interior(ActivationKind kind, double x);

/// Mean function lambda(theta). Throws DomainViolation outside the theta domain.
double mean_lambda(ActivationKind kind, double theta);
/// d lambda / d theta, which is also the variance of the law at theta.
double lambda_prime(ActivationKind kind, double theta);
/// log Z(theta) with Z the exact normalizer of exp(theta x + b x^2) over the support.
double log_partition(ActivationKind kind, double theta);
/// log p(x; theta); -infinity outside the support.
double log_density(ActivationKind kind, double theta, double x);
/// Inverse of mean_lambda. `mean` must lie in the open mean range of the kind.
double inverse_mean(ActivationKind kind, double mean);

/// One coordinate of the surrogate density: the law p(x; theta) of `kind`.
struct UnivariateLaw {
  ActivationKind kind;
  double theta;
};

double sample_univariate(const UnivariateLaw& law, RngStream& rng);

/// Standard normal restricted to [lo, hi]; both bounds finite, lo < hi.
/// Throws EmptyInterval when lo >= hi.
double truncated_interval_gaussian(double lo, double hi, RngStream& rng);

/// Same as truncated_interval_gaussian but either bound may be infinite.
double sample_truncated_normal(double lo, double hi, RngStream& rng);

/// Draw from the density proportional to exp(-rate * t) on [lo, hi].
/// One bound may be infinite as long as the density is integrable there.
/// |rate| < 1e-12 is treated as uniform.
double sample_truncated_exponential(double rate, double lo, double hi, RngStream& rng);

/// Mean of the positive-truncated Gaussian with prior variance sigma^2 and
/// location a: sigma * lambda_tg(a / sigma). Tends to max(a, 0) as sigma -> 0.
double relu_limit_mean(double a, double sigma);

}  // namespace maxent
