#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "lsaboot/rng.hpp"

namespace lsaboot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Absolute tolerance on eigenvalues below which a "PSD" matrix is rejected.
inline constexpr double kPsdTolerance = 1e-10;

void require_square(const Matrix& m, std::string_view what);
void require_finite(const Matrix& m, std::string_view what);
bool is_symmetric(const Matrix& m, double tol);

/// Ascending eigenvalues of the symmetric part of `m`.
Vector symmetric_eigenvalues(const Matrix& m);
double lambda_min(const Matrix& symmetric);
double lambda_max(const Matrix& symmetric);
/// Spectral norm (largest singular value).
double operator_norm(const Matrix& m);

/// Throws StabilityError naming the first eigenvalue with non-positive real
/// part, i.e. when -a_bar is not Hurwitz.
void require_hurwitz(const Matrix& a_bar);

/// Solves A^T Q + Q A = P for symmetric positive definite Q.
///
/// The d^2 x d^2 Kronecker system is factored with partial-pivot LU; fine for
/// the d <= ~50 problems this library targets.
Matrix solve_lyapunov(const Matrix& a_bar, const Matrix& p);

/// Symmetric PSD square root. Eigenvalues in [-1e-10, 0) are clipped to zero.
Matrix sqrtm_psd(const Matrix& sigma);

/// A non-empty sample of finite reals, optionally known to be sorted.
class EmpiricalSample {
 public:
  explicit EmpiricalSample(std::vector<double> values, bool sorted = false);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_sorted() const noexcept { return sorted_; }

  /// Sorted copy (or *this when already sorted).
  EmpiricalSample sorted() const;

 private:
  std::vector<double> values_;
  bool sorted_;
};

/// sup_x |F_a(x) - F_b(x)| with right-continuous empirical CDFs, exact over
/// the merged support.
double ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b);

/// The ceil(level * B)-th order statistic (1-based).
double empirical_quantile(const EmpiricalSample& s, double level);

/// `count` draws of sigma_sqrt * eta, eta ~ N(0, I), from `rng`.
std::vector<Vector> mvn_sample(const Matrix& sigma_sqrt, RngStream& rng, std::size_t count);

/// Compensated running sum of equally sized vectors.
class KahanVectorSum {
 public:
  explicit KahanVectorSum(Eigen::Index dim);
  void add(const Vector& v);
  const Vector& sum() const noexcept { return sum_; }

 private:
  Vector sum_;
  Vector comp_;
  Vector y_;
  Vector t_;
};

}  // namespace lsaboot
