#include "lsaboot/synthetic.hpp"

#include <cmath>

#include "lsaboot/error.hpp"

namespace lsaboot {

Matrix GaussianLsaProblem::noise_covariance(const Matrix& a_bar, const Vector& b_bar,
                                            double noise_a, double noise_b) {
  require_square(a_bar, "GaussianLsaProblem");
  if (b_bar.size() != a_bar.rows()) throw ValidationError("GaussianLsaProblem: dimension mismatch");
  const Vector star = a_bar.partialPivLu().solve(b_bar);
  const double var = noise_a * noise_a * star.squaredNorm() + noise_b * noise_b;
  return var * Matrix::Identity(a_bar.rows(), a_bar.rows());
}

GaussianLsaProblem::GaussianLsaProblem(Matrix a_bar, Vector b_bar, double noise_a, double noise_b)
    : noise_a_(noise_a),
      noise_b_(noise_b),
      exact_(a_bar, b_bar, noise_covariance(a_bar, b_bar, noise_a, noise_b)) {
  if (!(noise_a >= 0.0) || !(noise_b >= 0.0)) {
    throw ValidationError("GaussianLsaProblem: noise scales must be non-negative");
  }
}

void GaussianLsaProblem::sample(RngStream& rng, Observation& out) const {
  const Eigen::Index d = dim();
  out.a = exact_.a_bar();
  out.b = exact_.b_bar();
  if (noise_a_ > 0.0) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) out.a(i, j) += noise_a_ * rng.normal();
    }
  }
  if (noise_b_ > 0.0) {
    for (Eigen::Index i = 0; i < d; ++i) out.b(i) += noise_b_ * rng.normal();
  }
}

DeterministicLsaProblem::DeterministicLsaProblem(Matrix a_bar, Vector b_bar)
    : exact_(a_bar, b_bar, Matrix::Zero(a_bar.rows(), a_bar.rows())) {}

void DeterministicLsaProblem::sample(RngStream&, Observation& out) const {
  out.a = exact_.a_bar();
  out.b = exact_.b_bar();
}

std::optional<std::vector<WeightedObservation>> DeterministicLsaProblem::enumerate() const {
  return std::vector<WeightedObservation>{{1.0, {exact_.a_bar(), exact_.b_bar()}}};
}

Matrix random_hurwitz_matrix(Eigen::Index d, RngStream& rng, double min_real_part) {
  if (d < 1) throw ValidationError("random_hurwitz_matrix: d must be >= 1");
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.normal() / std::sqrt(static_cast<double>(d));
  }
  Eigen::EigenSolver<Matrix> es(g, false);
  const double shift = min_real_part - es.eigenvalues().real().minCoeff();
  g.diagonal().array() += shift;
  return g;
}

}  // namespace lsaboot
