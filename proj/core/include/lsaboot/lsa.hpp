#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lsaboot/numkit.hpp"
#include "lsaboot/rng.hpp"

namespace lsaboot {

/// Polynomial step sizes alpha_k = c0 / k^gamma, gamma in [1/2, 1).
class StepSchedule {
 public:
  StepSchedule(double c0, double gamma);

  double c0() const noexcept { return c0_; }
  double gamma() const noexcept { return gamma_; }
  /// alpha_k for k >= 1.
  double at(std::int64_t k) const;

 private:
  double c0_;
  double gamma_;
};

double step_at(const StepSchedule& s, std::int64_t k);

/// One observation (A(Z_k), b(Z_k)).
struct Observation {
  Matrix a;
  Vector b;

  static Observation zeros(Eigen::Index dim);
};

struct WeightedObservation {
  double probability;
  Observation observation;
};

/// Exact problem data: A_bar, b_bar, the noise covariance and the solution.
class ExactModel {
 public:
  ExactModel(Matrix a_bar, Vector b_bar, Matrix sigma_eps);

  const Matrix& a_bar() const noexcept { return a_bar_; }
  const Vector& b_bar() const noexcept { return b_bar_; }
  const Matrix& sigma_eps() const noexcept { return sigma_eps_; }
  const Vector& theta_star() const noexcept { return theta_star_; }
  /// A_bar^{-1} Sigma_eps A_bar^{-T}.
  Matrix sigma_inf() const;
  /// eps(z) = (A(z) - A_bar) theta* - (b(z) - b_bar).
  Vector noise(const Observation& obs) const;

 private:
  Matrix a_bar_;
  Vector b_bar_;
  Matrix sigma_eps_;
  Vector theta_star_;
};

/// Source of i.i.d. observations (A_k, b_k).
class LsaProblem {
 public:
  virtual ~LsaProblem() = default;

  virtual Eigen::Index dim() const = 0;
  /// Writes one draw into `out`, which must already have shape dim.
  virtual void sample(RngStream& rng, Observation& out) const = 0;
  virtual const ExactModel* exact() const noexcept { return nullptr; }
  /// Full support with probabilities, for finite sample spaces.
  virtual std::optional<std::vector<WeightedObservation>> enumerate() const { return std::nullopt; }
};

/// Number of leading iterations excluded from the average.
struct BurnIn {
  /// 0 means "tail": burn-in equals n.
  std::int64_t fixed_steps = 0;

  static BurnIn tail() { return {}; }
  static BurnIn fixed(std::int64_t steps);
  std::int64_t steps_for(std::int64_t n) const { return fixed_steps > 0 ? fixed_steps : n; }
};

struct RunOptions {
  BurnIn burn_in = BurnIn::tail();
  /// Keep every iterate and observation (diagnostics only, O(n d^2) memory).
  bool retain = false;
};

/// Iterates are guarded against leaving this ball.
inline constexpr double kDivergenceNorm = 1e12;

/// Outcome of one Polyak-Ruppert averaged LSA trajectory.
///
/// With burn-in n0 the run performs n0 + n steps and averages theta_k over
/// k = n0 ... n0 + n - 1. Observation for step k (1-based) is stored at
/// index k - 1.
struct LsaRun {
  std::int64_t n = 0;
  std::int64_t burn_in = 0;
  Vector theta_bar;
  Vector theta_at_n;   // theta_{n0}
  Vector theta_at_2n;  // theta_{n0 + n}
  std::optional<std::vector<Vector>> trajectory;
  std::optional<std::vector<Observation>> observations;

  std::int64_t total_steps() const noexcept { return burn_in + n; }
  bool retained() const noexcept { return trajectory.has_value() && observations.has_value(); }
  /// theta_k, 0 <= k <= total_steps(); requires retention.
  const Vector& theta(std::int64_t k) const;
  /// Observation of step k, 1 <= k <= total_steps(); requires retention.
  const Observation& observation(std::int64_t k) const;
};

/// theta <- theta - alpha (A theta - b); `scratch` is workspace of size dim.
inline void lsa_update(Vector& theta, const Observation& obs, double alpha, Vector& scratch) {
  scratch.noalias() = obs.a * theta;
  scratch -= obs.b;
  theta.noalias() -= alpha * scratch;
}

/// Throws DivergenceError if theta is non-finite or outside kDivergenceNorm.
void guard_iterate(const Vector& theta, std::int64_t step, std::int64_t replica = -1);

LsaRun run_lsa(const LsaProblem& p, const StepSchedule& s, std::int64_t n, const Vector& theta0,
               RngStream& rng, const RunOptions& options = {});

/// sqrt(n) A_bar (theta_bar - theta*) = -W + D1 - D2 - D3 + D4.
struct ErrorDecomposition {
  Vector t_stat;
  Vector w;
  Vector d1, d2, d3, d4;

  Vector reconstruction() const { return -w + d1 - d2 - d3 + d4; }
  /// |t - reconstruction| / (|t| + sum of term norms); 0 when everything vanishes.
  double relative_residual() const;
};

ErrorDecomposition decompose_error(const LsaRun& run, const LsaProblem& p, const StepSchedule& s);

/// Prod_{i=m}^{k} (I - alpha_i A_i), later factors on the left; identity if m > k.
/// `observations[i - 1]` holds step i.
Matrix gamma_product(std::span<const Observation> observations, const StepSchedule& s,
                     std::int64_t m, std::int64_t k);

/// Transient/fluctuation split and the J/H perturbation expansion, for every
/// k = 0 ... total_steps.
struct ExpansionTerms {
  std::vector<Vector> error;      // theta_k - theta*
  std::vector<Vector> transient;  // Gamma_{1:k} (theta_0 - theta*)
  std::vector<std::vector<Vector>> j;  // j[l][k] = J^l_k, l = 0..L
  std::vector<std::vector<Vector>> h;  // h[l][k] = H^l_k, l = 0..L

  int depth() const noexcept { return static_cast<int>(j.size()) - 1; }
  /// max_k relative residual of theta_k - theta* = transient + J^0 + H^0.
  double fluctuation_residual() const;
  /// max_k relative residual of H^0 = sum_{l=1}^{L} J^l + H^L.
  double nested_residual() const;
  /// max_k relative residual of theta_k - theta* = transient + sum_{l<=L} J^l + H^L.
  double full_residual() const;
};

ExpansionTerms expansion_terms(const LsaRun& run, const LsaProblem& p, const StepSchedule& s,
                               int depth);

/// |diff| / scale, or 0 when scale is 0 (both sides of the identity vanish).
double relative_residual(const Vector& diff, double scale);

}  // namespace lsaboot
