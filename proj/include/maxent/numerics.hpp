#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace maxent {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Orthonormal basis B (N x (N-M)) of the orthogonal complement of the
/// column space of W (N x M, M < N), so that W'B = 0 and B'B = I.
///
/// Computed from a full Householder factorization of W. Each column is
/// sign-normalized so its first entry with magnitude above 1e-12 is
/// positive, which makes the result deterministic for a fixed W.
/// Throws RankDeficient when W does not have full column rank.
Matrix null_space_basis(const Matrix& w);

/// Cholesky factor of a symmetric positive definite matrix.
///
/// A pivot smaller than 1e-12 times the largest diagonal entry is treated
/// as a failure and raises NotPositiveDefinite.
class Cholesky {
 public:
  explicit Cholesky(const Matrix& a);

  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;
  Matrix inverse() const;
  std::size_t size() const { return static_cast<std::size_t>(lower_.rows()); }
  const Matrix& lower() const { return lower_; }

 private:
  Matrix lower_;
};

Vector spd_solve(const Matrix& a, const Vector& rhs);

double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// exp(x^2) * erfc(x). Stable for large positive x, where erfc underflows.
double scaled_erfc(double x);

/// Orthogonal projection of x onto {x : W'x = z}: x - W (W'W)^{-1} (W'x - z).
Vector project_onto_affine(const Matrix& w, const Vector& x, const Vector& z);

}  // namespace maxent
