#include "maxent/numerics.hpp"

#include "maxent/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace maxent {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kPivotTol = 1e-12;
constexpr double kSignTol = 1e-12;
constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

Matrix null_space_basis(const Matrix& w) {
  const Eigen::Index n = w.rows();
  const Eigen::Index m = w.cols();
  if (m >= n) {
    throw InvalidInput("null_space_basis: W must have more rows than columns");
  }
  if (!w.allFinite()) {
    throw InvalidInput("null_space_basis: W has non-finite entries");
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(w);
  qr.setThreshold(kRankTol);
  if (qr.rank() < m) {
    throw RankDeficient(static_cast<std::size_t>(qr.rank()), static_cast<std::size_t>(m));
  }

  Matrix q = qr.householderQ();
  Matrix b = q.rightCols(n - m);
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(b(i, j)) > kSignTol) {
        if (b(i, j) < 0.0) b.col(j) *= -1.0;
        break;
      }
    }
  }
  return b;
}

Cholesky::Cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw InvalidInput("Cholesky: matrix must be square");
  }
  const Eigen::Index n = a.rows();
  lower_ = Matrix::Zero(n, n);
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double threshold = kPivotTol * max_diag;

  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= lower_(j, k) * lower_(j, k);
    if (!(d > threshold)) throw NotPositiveDefinite(static_cast<std::size_t>(j));
    const double ljj = std::sqrt(d);
    lower_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= lower_(i, k) * lower_(j, k);
      lower_(i, j) = s / ljj;
    }
  }
}

Vector Cholesky::solve(const Vector& rhs) const {
  Vector y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix Cholesky::solve(const Matrix& rhs) const {
  Matrix y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix Cholesky::inverse() const {
  return solve(Matrix(Matrix::Identity(lower_.rows(), lower_.rows())));
}

Vector spd_solve(const Matrix& a, const Vector& rhs) {
  if (rhs.size() != a.rows()) throw InvalidInput("spd_solve: dimension mismatch");
  return Cholesky(a).solve(rhs);
}

double std_normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double scaled_erfc(double x) {
  if (x < 4.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  // Continued fraction erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x+ (1/2)/(x+ 1/(x+ (3/2)/(x+ ...)))),
  // evaluated with the modified Lentz algorithm.
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    const double a = 0.5 * k;
    d = x + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::numbers::inv_sqrtpi / f;
}

Vector project_onto_affine(const Matrix& w, const Vector& x, const Vector& z) {
  const Vector r = w.transpose() * x - z;
  const Matrix gram = w.transpose() * w;
  return x - w * spd_solve(gram, r);
}

}  // namespace maxent
