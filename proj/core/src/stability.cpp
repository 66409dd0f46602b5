#include "lsaboot/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lsaboot/error.hpp"

namespace lsaboot {

namespace {

Matrix inverse_sqrt_spd(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (q + q.transpose()));
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw StabilityError("Q is not positive definite");
  const Vector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

double q_norm_squared(const Matrix& m, const Matrix& q, const Matrix& q_inv_sqrt) {
  const Matrix inner = q_inv_sqrt * m.transpose() * q * m * q_inv_sqrt;
  return lambda_max(inner);
}

std::string format_bound(const char* name, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(6);
  os << name << ": " << lhs << " > " << rhs;
  return os.str();
}

}  // namespace

double q_operator_norm(const Matrix& m, const Matrix& q) {
  require_square(m, "q_operator_norm");
  return std::sqrt(std::max(0.0, q_norm_squared(m, q, inverse_sqrt_spd(q))));
}

ContractionCheck check_contraction(const Matrix& a_bar, const Matrix& q, double a, double alpha_max,
                                   int points, double tol) {
  if (points < 2) throw ValidationError("check_contraction: need at least 2 grid points");
  const Matrix q_inv_sqrt = inverse_sqrt_spd(q);
  const Eigen::Index d = a_bar.rows();
  ContractionCheck out;
  for (int i = 0; i < points; ++i) {
    const double alpha = alpha_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const Matrix step = Matrix::Identity(d, d) - alpha * a_bar;
    const double slack = q_norm_squared(step, q, q_inv_sqrt) - (1.0 - alpha * a);
    if (slack > out.worst_slack) {
      out.worst_slack = slack;
      out.worst_alpha = alpha;
    }
    if (slack > tol) out.passed = false;
  }
  return out;
}

StabilityCertificate certify(const Matrix& a_bar, const Matrix& p) {
  require_square(a_bar, "certify(a_bar)");
  require_square(p, "certify(p)");
  if (!is_symmetric(p, 1e-12)) throw ValidationError("certify: P is not symmetric");
  const double p_min = lambda_min(p);
  if (!(p_min > 1.0)) {
    std::ostringstream os;
    os << "certify: P must satisfy P > I (lambda_min(P) = " << p_min << ")";
    throw ValidationError(os.str());
  }

  StabilityCertificate cert;
  cert.p = p;
  cert.q = solve_lyapunov(a_bar, p);
  const Vector q_ev = symmetric_eigenvalues(cert.q);
  const double q_norm = q_ev.maxCoeff();
  cert.kappa_q = q_ev.maxCoeff() / q_ev.minCoeff();
  cert.a = p_min / (2.0 * q_norm);
  cert.a_bar_q_norm = q_operator_norm(a_bar, cert.q);
  // kappa_Q alone overshoots once lambda_min(Q) > 1; |Q| takes over there.
  const double kappa_eff = std::max(cert.kappa_q, q_norm);
  cert.alpha_inf = std::min(p_min / (2.0 * kappa_eff * cert.a_bar_q_norm * cert.a_bar_q_norm),
                            q_norm / p_min);

  const ContractionCheck check = check_contraction(a_bar, cert.q, cert.a, cert.alpha_inf);
  cert.worst_contraction_slack = check.worst_slack;
  if (!check.passed) {
    std::ostringstream os;
    os << "certify: contraction check failed at alpha = " << check.worst_alpha << " (excess "
       << check.worst_slack << ")";
    throw StabilityError(os.str());
  }
  return cert;
}

StabilityCertificate certify(const Matrix& a_bar) {
  require_square(a_bar, "certify(a_bar)");
  return certify(a_bar, 2.0 * Matrix::Identity(a_bar.rows(), a_bar.rows()));
}

NoiseStats noise_stats(const LsaProblem& p, RngStream& rng, std::int64_t draws) {
  const ExactModel* exact = p.exact();
  if (exact == nullptr) throw ValidationError("noise_stats: problem has no exact model");
  const Eigen::Index d = p.dim();

  NoiseStats out;
  out.sigma_eps = Matrix::Zero(d, d);
  auto visit = [&](const Observation& obs, double weight) {
    const Vector eps = exact->noise(obs);
    out.b_a = std::max({out.b_a, operator_norm(obs.a), operator_norm(obs.a - exact->a_bar())});
    out.eps_inf = std::max(out.eps_inf, eps.norm());
    out.sigma_eps.noalias() += weight * eps * eps.transpose();
  };

  if (auto support = p.enumerate()) {
    out.enumerated = true;
    for (const auto& item : *support) {
      if (item.probability > 0.0) visit(item.observation, item.probability);
    }
  } else {
    if (draws < 1) throw ValidationError("noise_stats: draws must be >= 1");
    Observation obs = Observation::zeros(d);
    const double weight = 1.0 / static_cast<double>(draws);
    for (std::int64_t i = 0; i < draws; ++i) {
      p.sample(rng, obs);
      if (!obs.a.allFinite() || !obs.b.allFinite()) {
        throw NumericalError("noise_stats: sampler produced a non-finite observation");
      }
      visit(obs, weight);
    }
  }
  out.sigma_eps = 0.5 * (out.sigma_eps + out.sigma_eps.transpose()).eval();
  out.lambda_min_eps = std::max(0.0, lambda_min(out.sigma_eps));
  return out;
}

AcceptanceReport check_schedule(const StepSchedule& s, const StabilityCertificate& cert) {
  AcceptanceReport report;
  const double c0 = s.c0();
  if (!(c0 > 0.0)) report.violations.push_back("c0 > 0");
  if (c0 > cert.alpha_inf) report.violations.push_back(format_bound("c0 <= alpha_inf", c0, cert.alpha_inf));
  if (c0 > cert.a) report.violations.push_back(format_bound("c0 <= a", c0, cert.a));
  if (c0 > 1.0 - s.gamma()) {
    report.violations.push_back(format_bound("c0 <= 1 - gamma", c0, 1.0 - s.gamma()));
  }
  report.passed = report.violations.empty();
  report.lhs = c0;
  report.threshold = std::min({cert.alpha_inf, cert.a, 1.0 - s.gamma()});
  return report;
}

double sample_size_threshold(const StepSchedule& s, const StabilityCertificate& cert,
                             const NoiseStats& noise) {
  const double c0 = s.c0();
  const double g = s.gamma();
  const double b2 = noise.b_a * noise.b_a;
  if (g == 0.5) {
    const double shrink = 1.0 - std::sqrt(2.0) / 2.0;
    return std::max(c0 * cert.kappa_q * b2 / (cert.a * shrink), 4.0 / (cert.a * c0 * shrink));
  }
  const double shrink = 1.0 - std::pow(0.5, 1.0 - g);
  return std::max(2.0 * c0 * cert.kappa_q * b2 / (cert.a * (2.0 * g - 1.0) * shrink),
                  8.0 * g * (1.0 - g) / (cert.a * c0 * shrink));
}

double sample_size_lhs(double gamma, std::int64_t n) {
  if (n < 2) return 0.0;
  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  if (gamma == 0.5) return std::sqrt(nn) / ((1.0 + log_n) * log_n);
  return std::pow(nn, 1.0 - gamma) / log_n;
}

std::int64_t sample_size_turning_point(double gamma) {
  // d/dlog(n) of log(lhs) vanishes at log n = (3 + sqrt 17)/2 (gamma = 1/2) or 1/(1 - gamma).
  const double log_n = gamma == 0.5 ? (3.0 + std::sqrt(17.0)) / 2.0 : 1.0 / (1.0 - gamma);
  return static_cast<std::int64_t>(std::ceil(std::exp(log_n)));
}

AcceptanceReport check_sample_size(const StepSchedule& s, const StabilityCertificate& cert,
                                   const NoiseStats& noise, std::int64_t n, std::int64_t d) {
  AcceptanceReport report;
  const double threshold = sample_size_threshold(s, cert, noise);
  const std::int64_t floor_n = std::max<std::int64_t>(d, sample_size_turning_point(s.gamma()));
  auto passes = [&](std::int64_t m) { return m >= floor_n && sample_size_lhs(s.gamma(), m) >= threshold; };

  report.threshold = threshold;
  report.lhs = sample_size_lhs(s.gamma(), n);
  if (n < d) {
    std::ostringstream os;
    os << "n >= d: " << n << " < " << d;
    report.violations.push_back(os.str());
  }
  if (n < floor_n && n >= d) {
    std::ostringstream os;
    os << "n below the increasing branch of the bound (" << n << " < " << floor_n << ")";
    report.violations.push_back(os.str());
  }
  if (report.lhs < threshold) {
    std::ostringstream os;
    os << "sample-size bound: lhs " << report.lhs << " < threshold " << threshold;
    report.violations.push_back(os.str());
  }
  report.passed = report.violations.empty();

  // Galloping then bisection over [floor_n, 2^63 - 1]; passes() is monotone there.
  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  if (!passes(kMax)) {
    report.no_finite_n = true;
    return report;
  }
  std::int64_t hi = floor_n;
  std::int64_t lo = floor_n - 1;
  while (!passes(hi)) {
    lo = hi;
    hi = hi > kMax / 2 ? kMax : hi * 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (passes(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  report.minimal_n = hi;
  return report;
}

}  // namespace lsaboot
