// Grid quadrature of E[x | W'x = z] over the null-space coordinates u of
// x(u) = x_p + B u, where x_p = W (W'W)^{-1} z. The feasible u-region is a
// convex polygon (or interval); the log prior along it is linear (ted, exp)
// or a concave quadratic with unit curvature (tg, linear).

#include "maxent/errors.hpp"
#include "maxent/manifold_sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace maxent {

namespace {

using Point = std::array<double, 2>;

constexpr double kBigBox = 1e6;
constexpr double kLogDrop = 60.0;   // integrand below exp(-60) of its peak is dropped
constexpr double kGaussReach = 11.0;  // sqrt(2 * kLogDrop), rounded up

// Halfplane a'u <= beta.
struct HalfPlane {
  Point a;
  double beta;
};

std::vector<Point> clip(const std::vector<Point>& poly, const HalfPlane& hp) {
  std::vector<Point> out;
  const std::size_t n = poly.size();
  auto side = [&](const Point& p) { return hp.a[0] * p[0] + hp.a[1] * p[1] - hp.beta; };
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    const double sp = side(p);
    const double sq = side(q);
    if (sp <= 0.0) out.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
      const double t = sp / (sp - sq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

Point closest_point(const std::vector<Point>& poly, const Point& target) {
  // Inside test for a counter-clockwise convex polygon.
  bool inside = true;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n && inside; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    const double cross = (q[0] - p[0]) * (target[1] - p[1]) - (q[1] - p[1]) * (target[0] - p[0]);
    if (cross < 0.0) inside = false;
  }
  if (inside) return target;

  Point best = poly[0];
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    const double ex = q[0] - p[0];
    const double ey = q[1] - p[1];
    const double len2 = ex * ex + ey * ey;
    double t = len2 > 0.0 ? ((target[0] - p[0]) * ex + (target[1] - p[1]) * ey) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point c{p[0] + t * ex, p[1] + t * ey};
    const double d = (c[0] - target[0]) * (c[0] - target[0]) + (c[1] - target[1]) * (c[1] - target[1]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// Composite Simpson weights for `points` nodes (odd count) on [a, b].
template <typename F>
void simpson(double a, double b, std::size_t points, F&& visit) {
  const std::size_t intervals = points - 1;
  const double h = (b - a) / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) {
    double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    visit(a + h * static_cast<double>(i), w * h / 3.0);
  }
}

struct Moments {
  double mass = 0.0;
  std::array<double, 2> first{0.0, 0.0};
};

}  // namespace

Vector conditional_mean_oracle(const LayerMap& map, const Vector& z, std::size_t grid_points) {
  const Matrix& w = map.w();
  const Eigen::Index n = w.rows();
  const Eigen::Index dim = n - w.cols();
  if (dim > 2) throw OracleUnavailable("conditional mean oracle is restricted to N - M <= 2");
  if (static_cast<std::size_t>(z.size()) != map.feature_dim()) {
    throw InvalidInput("conditional_mean_oracle: z has the wrong length");
  }
  if (grid_points < 3) throw InvalidInput("conditional_mean_oracle: grid too small");
  if (grid_points % 2 == 0) ++grid_points;

  const ActivationKind kind = map.kind();
  const Vector xp = w * spd_solve(w.transpose() * w, z);
  if (dim == 0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!in_support_interior(kind, xp[i])) throw OracleUnavailable("manifold point outside support");
    }
    return xp;
  }

  const Matrix basis = null_space_basis(w);
  const Vector& theta0 = map.theta0();
  const bool quadratic = kind_info(kind).quad_coeff != 0.0;
  // log p0(x_p + B u) = const + tilt'u - (quadratic ? |u|^2 / 2 : 0), since B'x_p = 0.
  const Vector tilt = basis.transpose() * theta0;
  auto log_weight = [&](const Point& u) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      v += tilt[j] * u[static_cast<std::size_t>(j)];
      if (quadratic) v -= 0.5 * u[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
    }
    return v;
  };

  // Support constraints as halfplanes in u (second coordinate unused when dim == 1).
  std::vector<HalfPlane> planes;
  const Support support = kind_info(kind).support;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point row{basis(i, 0), dim > 1 ? basis(i, 1) : 0.0};
    if (support != Support::real) planes.push_back({{-row[0], -row[1]}, xp[i]});  // x_i >= 0
    if (support == Support::unit_interval) planes.push_back({row, 1.0 - xp[i]});   // x_i <= 1
  }

  std::vector<Point> poly;
  if (dim == 1) {
    poly = {{-kBigBox, 0.0}, {kBigBox, 0.0}};
  } else {
    poly = {{-kBigBox, -kBigBox}, {kBigBox, -kBigBox}, {kBigBox, kBigBox}, {-kBigBox, kBigBox}};
  }
  auto clip_all = [&](const std::vector<HalfPlane>& hps) {
    for (const auto& hp : hps) {
      if (dim == 1) {
        // Interval [poly[0], poly[1]] against a u <= beta.
        const double a = hp.a[0];
        if (a > 0.0) {
          poly[1][0] = std::min(poly[1][0], hp.beta / a);
        } else if (a < 0.0) {
          poly[0][0] = std::max(poly[0][0], hp.beta / a);
        } else if (hp.beta < 0.0) {
          poly.clear();
        }
        if (!poly.empty() && !(poly[0][0] < poly[1][0])) poly.clear();
      } else {
        poly = clip(poly, hp);
      }
      if (poly.empty()) throw OracleUnavailable("feasible set on the manifold is empty");
    }
  };
  clip_all(planes);

  // Peak of the log weight over the feasible set, then drop the region more
  // than kLogDrop below it.
  Point peak = poly[0];
  if (quadratic) {
    const Point mu{tilt[0], dim > 1 ? tilt[1] : 0.0};
    if (dim == 1) {
      peak = {std::clamp(mu[0], poly[0][0], poly[1][0]), 0.0};
    } else {
      peak = closest_point(poly, mu);
    }
    std::vector<HalfPlane> reach{{{1.0, 0.0}, peak[0] + kGaussReach}, {{-1.0, 0.0}, -(peak[0] - kGaussReach)}};
    if (dim > 1) {
      reach.push_back({{0.0, 1.0}, peak[1] + kGaussReach});
      reach.push_back({{0.0, -1.0}, -(peak[1] - kGaussReach)});
    }
    clip_all(reach);
  } else {
    for (const auto& p : poly) {
      if (log_weight(p) > log_weight(peak)) peak = p;
    }
    const double top = log_weight(peak);
    const Point slope{tilt[0], dim > 1 ? tilt[1] : 0.0};
    if (slope[0] != 0.0 || slope[1] != 0.0) {
      clip_all({{{-slope[0], -slope[1]}, -(top - kLogDrop)}});
    }
  }
  for (const auto& p : poly) {
    if (std::abs(p[0]) >= 0.5 * kBigBox || std::abs(p[1]) >= 0.5 * kBigBox) {
      throw OracleUnavailable("prior is not integrable over the feasible set");
    }
  }
  const double ref = log_weight(peak);

  Moments mom;
  if (dim == 1) {
    simpson(poly[0][0], poly[1][0], grid_points, [&](double u, double wt) {
      const double e = wt * std::exp(log_weight({u, 0.0}) - ref);
      mom.mass += e;
      mom.first[0] += e * u;
    });
  } else {
    // Outer integral split at vertex abscissae so each piece has a smooth chord.
    std::vector<double> cuts;
    for (const auto& p : poly) cuts.push_back(p[0]);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto chord = [&](double u1) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      const std::size_t m = poly.size();
      for (std::size_t i = 0; i < m; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % m];
        const double x0 = std::min(p[0], q[0]);
        const double x1 = std::max(p[0], q[0]);
        if (u1 < x0 || u1 > x1) continue;
        if (x1 == x0) {
          lo = std::min({lo, p[1], q[1]});
          hi = std::max({hi, p[1], q[1]});
        } else {
          const double t = (u1 - p[0]) / (q[0] - p[0]);
          const double y = p[1] + t * (q[1] - p[1]);
          lo = std::min(lo, y);
          hi = std::max(hi, y);
        }
      }
      return std::pair{lo, hi};
    };

    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c];
      const double b = cuts[c + 1];
      if (!(b - a > 1e-14 * std::max(1.0, std::abs(a)))) continue;
      simpson(a, b, grid_points, [&](double u1, double w1) {
        const auto [lo, hi] = chord(u1);
        if (!(hi > lo)) return;
        simpson(lo, hi, grid_points, [&](double u2, double w2) {
          const double e = w1 * w2 * std::exp(log_weight({u1, u2}) - ref);
          mom.mass += e;
          mom.first[0] += e * u1;
          mom.first[1] += e * u2;
        });
      });
    }
  }
  if (!(mom.mass > 0.0)) throw OracleUnavailable("quadrature mass vanished");

  Vector ubar(dim);
  for (Eigen::Index j = 0; j < dim; ++j) ubar[j] = mom.first[static_cast<std::size_t>(j)] / mom.mass;
  return xp + basis * ubar;
}

}  // namespace maxent
