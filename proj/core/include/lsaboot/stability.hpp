#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsaboot/lsa.hpp"
#include "lsaboot/numkit.hpp"

namespace lsaboot {

/// Lyapunov certificate for -A_bar Hurwitz: A_bar^T Q + Q A_bar = P and
/// |I - alpha A_bar|_Q^2 <= 1 - alpha a for alpha in [0, alpha_inf].
struct StabilityCertificate {
  Matrix p;
  Matrix q;
  double a = 0.0;
  double alpha_inf = 0.0;
  double kappa_q = 1.0;
  /// |A_bar|_Q, the Q-induced operator norm.
  double a_bar_q_norm = 0.0;
  /// Largest value of |I - alpha A_bar|_Q^2 - (1 - alpha a) seen on the grid.
  double worst_contraction_slack = 0.0;
};

/// Q-induced operator norm sqrt(lambda_max(Q^{-1/2} M^T Q M Q^{-1/2})).
double q_operator_norm(const Matrix& m, const Matrix& q);

struct ContractionCheck {
  bool passed = true;
  double worst_slack = -INFINITY;
  double worst_alpha = 0.0;
};

/// Checks |I - alpha A_bar|_Q^2 <= 1 - alpha a + tol on `points` equispaced alphas in [0, alpha_max].
ContractionCheck check_contraction(const Matrix& a_bar, const Matrix& q, double a, double alpha_max,
                                   int points = 100, double tol = 1e-12);

/// Certificate for a user-supplied P (symmetric, P > I).
StabilityCertificate certify(const Matrix& a_bar, const Matrix& p);
/// Certificate with the default P = 2 I.
StabilityCertificate certify(const Matrix& a_bar);

/// Suprema of the observation and noise norms, and lambda_min(Sigma_eps).
struct NoiseStats {
  double b_a = 0.0;
  double eps_inf = 0.0;
  double lambda_min_eps = 0.0;
  Matrix sigma_eps;
  /// True when computed by exact enumeration of a finite support.
  bool enumerated = false;
};

NoiseStats noise_stats(const LsaProblem& p, RngStream& rng, std::int64_t draws);

/// Pass/fail with the list of violated conditions.
struct AcceptanceReport {
  bool passed = true;
  std::vector<std::string> violations;
  /// Smallest passing sample size, for check_sample_size.
  std::optional<std::int64_t> minimal_n;
  /// check_sample_size only: set when no representable n satisfies the bound.
  bool no_finite_n = false;
  double lhs = 0.0;
  double threshold = 0.0;
};

/// 0 < c0 <= min(alpha_inf, a, 1 - gamma).
AcceptanceReport check_schedule(const StepSchedule& s, const StabilityCertificate& cert);

/// Right-hand side of the sample-size bound for the schedule's gamma branch.
double sample_size_threshold(const StepSchedule& s, const StabilityCertificate& cert,
                             const NoiseStats& noise);
/// Left-hand side: sqrt(n)/((1 + log n) log n) for gamma = 1/2, n^{1-gamma}/log n otherwise.
double sample_size_lhs(double gamma, std::int64_t n);
/// Smallest n from which the left-hand side is non-decreasing.
std::int64_t sample_size_turning_point(double gamma);

/// n >= d, n on the increasing branch of the left-hand side, and lhs >= threshold.
AcceptanceReport check_sample_size(const StepSchedule& s, const StabilityCertificate& cert,
                                   const NoiseStats& noise, std::int64_t n, std::int64_t d);

}  // namespace lsaboot
