#include "maxent/exponential_family.hpp"

#include "maxent/errors.hpp"
#include "maxent/numerics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace maxent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kTedSeriesCut = 1e-3;
constexpr double kTgTailCut = -4.0;
constexpr double kFlatRate = 1e-12;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

constexpr std::array<KindInfo, 4> kKinds{{
    {ActivationKind::ted, "ted", 0.0, Support::unit_interval, 0.0},
    {ActivationKind::tg, "tg", -0.5, Support::positive, 0.0},
    {ActivationKind::exp, "exp", 0.0, Support::positive, -1.0},
    {ActivationKind::linear, "linear", -0.5, Support::real, 0.0},
}};

void require_domain(ActivationKind kind, double theta) {
  if (!in_theta_domain(kind, theta)) {
    throw DomainViolation(std::string("natural parameter ") + std::to_string(theta) +
                          " outside the domain of kind " + std::string(to_string(kind)));
  }
}

// N(theta) / Phi(theta).
double tg_ratio(double theta) {
  if (theta < kTgTailCut) {
    return std::sqrt(2.0 / std::numbers::pi) / scaled_erfc(-theta * kInvSqrt2);
  }
  return std_normal_pdf(theta) / std_normal_cdf(theta);
}

double ted_mean(double theta) {
  if (std::abs(theta) < kTedSeriesCut) {
    const double t3 = theta * theta * theta;
    return 0.5 + theta / 12.0 - t3 / 720.0;
  }
  if (theta > 0.0) return 1.0 / (-std::expm1(-theta)) - 1.0 / theta;
  return std::exp(theta) / std::expm1(theta) - 1.0 / theta;
}

double ted_variance(double theta) {
  const double t2 = theta * theta;
  if (std::abs(theta) < kTedSeriesCut) {
    return 1.0 / 12.0 - t2 / 240.0 + t2 * t2 / 6048.0;
  }
  const double a = std::abs(theta);
  const double em = std::expm1(-a);
  return 1.0 / t2 - std::exp(-a) / (em * em);
}

double ted_log_partition(double theta) {
  if (std::abs(theta) < kTedSeriesCut) {
    const double t2 = theta * theta;
    return theta / 2.0 + t2 / 24.0 - t2 * t2 / 2880.0;
  }
  if (theta > 0.0) return theta + std::log(-std::expm1(-theta)) - std::log(theta);
  return std::log(-std::expm1(theta)) - std::log(-theta);
}

double tg_log_partition(double theta) {
  if (theta < 0.0) {
    return kLogSqrt2Pi + std::log(0.5 * scaled_erfc(-theta * kInvSqrt2));
  }
  return 0.5 * theta * theta + kLogSqrt2Pi + std::log1p(-std_normal_cdf(-theta));
}

// Safeguarded Newton for a strictly increasing mean function on [lo, hi].
double invert_monotone(ActivationKind kind, double mean, double lo, double hi) {
  double theta = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = mean_lambda(kind, theta) - mean;
    if (f > 0.0) {
      hi = theta;
    } else {
      lo = theta;
    }
    const double step = f / lambda_prime(kind, theta);
    double next = theta - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - theta) <= 1e-15 * std::max(1.0, std::abs(theta))) return next;
    theta = next;
  }
  return theta;
}

// Standard normal on [a, b] with 0 <= a < b (b may be +inf).
double right_tail_normal(double a, double b, RngStream& rng) {
  const double root = std::sqrt(a * a + 4.0);
  const double alpha = 0.5 * (a + root);
  const double uniform_cut = (2.0 / (a + root)) * std::exp(0.25 * (a * a - a * root) + 0.5);
  if (b - a < uniform_cut) {
    for (;;) {
      const double x = a + (b - a) * rng.uniform();
      if (rng.uniform() <= std::exp(-0.5 * (x - a) * (x + a))) return x;
    }
  }
  for (;;) {
    const double x = a + rng.exponential() / alpha;
    if (x > b) continue;
    const double d = x - alpha;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return x;
  }
}

}  // namespace

const KindInfo& kind_info(ActivationKind kind) {
  return kKinds[static_cast<std::size_t>(kind)];
}

std::string_view to_string(ActivationKind kind) { return kind_info(kind).name; }

ActivationKind parse_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& k : kKinds) {
    if (k.name == lower) return k.kind;
  }
  throw InvalidInput("unknown activation kind '" + std::string(name) +
                     "' (expected ted, tg, exp or linear)");
}

bool in_theta_domain(ActivationKind kind, double theta) {
  if (!std::isfinite(theta)) return false;
  return kind != ActivationKind::exp || theta < 0.0;
}

bool in_support_interior(ActivationKind kind, double x) {
  if (!std::isfinite(x)) return false;
  switch (kind_info(kind).support) {
    case Support::unit_interval:
      return x > 0.0 && x < 1.0;
    case Support::positive:
      return x > 0.0;
    case Support::real:
      return true;
  }
  return false;
}

double mean_lambda(ActivationKind kind, double theta) {
  require_domain(kind, theta);
  switch (kind) {
    case ActivationKind::ted:
      return ted_mean(theta);
    case ActivationKind::tg:
      return theta + tg_ratio(theta);
    case ActivationKind::exp:
      return -1.0 / theta;
    case ActivationKind::linear:
      return theta;
  }
  return 0.0;
}

double lambda_prime(ActivationKind kind, double theta) {
  require_domain(kind, theta);
  switch (kind) {
    case ActivationKind::ted:
      return ted_variance(theta);
    case ActivationKind::tg: {
      const double r = tg_ratio(theta);
      return 1.0 - r * (theta + r);
    }
    case ActivationKind::exp:
      return 1.0 / (theta * theta);
    case ActivationKind::linear:
      return 1.0;
  }
  return 0.0;
}

double log_partition(ActivationKind kind, double theta) {
  require_domain(kind, theta);
  switch (kind) {
    case ActivationKind::ted:
      return ted_log_partition(theta);
    case ActivationKind::tg:
      return tg_log_partition(theta);
    case ActivationKind::exp:
      return -std::log(-theta);
    case ActivationKind::linear:
      return 0.5 * theta * theta + kLogSqrt2Pi;
  }
  return 0.0;
}

double log_density(ActivationKind kind, double theta, double x) {
  const auto& info = kind_info(kind);
  switch (info.support) {
    case Support::unit_interval:
      if (x < 0.0 || x > 1.0) return -kInf;
      break;
    case Support::positive:
      if (x < 0.0) return -kInf;
      break;
    case Support::real:
      break;
  }
  return theta * x + info.quad_coeff * x * x - log_partition(kind, theta);
}

double inverse_mean(ActivationKind kind, double mean) {
  if (!std::isfinite(mean)) throw DomainViolation("inverse_mean: non-finite mean");
  switch (kind) {
    case ActivationKind::linear:
      return mean;
    case ActivationKind::exp:
      if (!(mean > 0.0)) throw DomainViolation("inverse_mean: exp mean must be positive");
      return -1.0 / mean;
    case ActivationKind::ted:
      if (!(mean > 0.0 && mean < 1.0)) {
        throw DomainViolation("inverse_mean: ted mean must lie in (0, 1)");
      }
      return invert_monotone(kind, mean, -1.0 / mean - 1.0, 1.0 / (1.0 - mean) + 1.0);
    case ActivationKind::tg:
      if (!(mean > 0.0)) throw DomainViolation("inverse_mean: tg mean must be positive");
      return invert_monotone(kind, mean, -1.0 / mean - 1.0, mean);
  }
  return 0.0;
}

double sample_univariate(const UnivariateLaw& law, RngStream& rng) {
  require_domain(law.kind, law.theta);
  switch (law.kind) {
    case ActivationKind::ted:
      return sample_truncated_exponential(-law.theta, 0.0, 1.0, rng);
    case ActivationKind::tg:
      return law.theta + sample_truncated_normal(-law.theta, kInf, rng);
    case ActivationKind::exp:
      return rng.exponential() / -law.theta;
    case ActivationKind::linear:
      return law.theta + rng.normal();
  }
  return 0.0;
}

double truncated_interval_gaussian(double lo, double hi, RngStream& rng) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidInput("truncated_interval_gaussian: bounds must be finite");
  }
  return sample_truncated_normal(lo, hi, rng);
}

double sample_truncated_normal(double lo, double hi, RngStream& rng) {
  if (!(lo < hi)) throw EmptyInterval("truncated normal: empty interval");
  if (lo >= 0.0) return right_tail_normal(lo, hi, rng);
  if (hi <= 0.0) return -right_tail_normal(-hi, -lo, rng);
  if (hi - lo >= std::sqrt(2.0 * std::numbers::pi)) {
    for (;;) {
      const double x = rng.normal();
      if (x >= lo && x <= hi) return x;
    }
  }
  for (;;) {
    const double x = lo + (hi - lo) * rng.uniform();
    if (rng.uniform() <= std::exp(-0.5 * x * x)) return x;
  }
}

double sample_truncated_exponential(double rate, double lo, double hi, RngStream& rng) {
  if (!(lo < hi)) throw EmptyInterval("truncated exponential: empty interval");
  const double u = rng.uniform_open();
  if (std::abs(rate) < kFlatRate) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      throw InvalidInput("truncated exponential: flat density on an unbounded interval");
    }
    return lo + u * (hi - lo);
  }
  if (rate > 0.0) {
    if (!std::isfinite(lo)) throw InvalidInput("truncated exponential: not integrable");
    const double t = lo - std::log1p(u * std::expm1(-rate * (hi - lo))) / rate;
    return std::min(t, hi);
  }
  if (!std::isfinite(hi)) throw InvalidInput("truncated exponential: not integrable");
  const double s = -rate;
  const double t = hi + std::log1p(u * std::expm1(-s * (hi - lo))) / s;
  return std::max(t, lo);
}

double relu_limit_mean(double a, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("relu_limit_mean: sigma must be positive");
  return sigma * mean_lambda(ActivationKind::tg, a / sigma);
}

}  // namespace maxent
