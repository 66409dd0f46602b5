#pragma once

#include "lsaboot/lsa.hpp"

namespace lsaboot {

/// A_k = A_bar + noise_a * G_k, b_k = b_bar + noise_b * g_k with standard
/// Gaussian G_k (d x d) and g_k (d). Then Sigma_eps = (noise_a^2 |theta*|^2 + noise_b^2) I.
class GaussianLsaProblem final : public LsaProblem {
 public:
  GaussianLsaProblem(Matrix a_bar, Vector b_bar, double noise_a, double noise_b);

  Eigen::Index dim() const override { return exact_.a_bar().rows(); }
  void sample(RngStream& rng, Observation& out) const override;
  const ExactModel* exact() const noexcept override { return &exact_; }

  double noise_a() const noexcept { return noise_a_; }
  double noise_b() const noexcept { return noise_b_; }

 private:
  static Matrix noise_covariance(const Matrix& a_bar, const Vector& b_bar, double noise_a,
                                 double noise_b);

  double noise_a_;
  double noise_b_;
  ExactModel exact_;
};

/// A_k = A_bar, b_k = b_bar every step.
class DeterministicLsaProblem final : public LsaProblem {
 public:
  DeterministicLsaProblem(Matrix a_bar, Vector b_bar);

  Eigen::Index dim() const override { return exact_.a_bar().rows(); }
  void sample(RngStream& rng, Observation& out) const override;
  const ExactModel* exact() const noexcept override { return &exact_; }
  std::optional<std::vector<WeightedObservation>> enumerate() const override;

 private:
  ExactModel exact_;
};

/// Random d x d matrix whose eigenvalues all have real part >= min_real_part.
Matrix random_hurwitz_matrix(Eigen::Index d, RngStream& rng, double min_real_part = 0.2);

}  // namespace lsaboot
