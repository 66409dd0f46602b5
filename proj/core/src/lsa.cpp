#include "lsaboot/lsa.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "lsaboot/error.hpp"

namespace lsaboot {

StepSchedule::StepSchedule(double c0, double gamma) : c0_(c0), gamma_(gamma) {
  if (!std::isfinite(c0) || !(c0 > 0.0)) throw ValidationError("StepSchedule: c0 must be positive and finite");
  if (!std::isfinite(gamma) || gamma < 0.5 || gamma >= 1.0) {
    throw ValidationError("StepSchedule: gamma must lie in [1/2, 1)");
  }
}

double StepSchedule::at(std::int64_t k) const {
  if (k < 1) throw ValidationError("step_at: step index must be >= 1");
  return c0_ / std::pow(static_cast<double>(k), gamma_);
}

double step_at(const StepSchedule& s, std::int64_t k) { return s.at(k); }

Observation Observation::zeros(Eigen::Index dim) { return {Matrix::Zero(dim, dim), Vector::Zero(dim)}; }

ExactModel::ExactModel(Matrix a_bar, Vector b_bar, Matrix sigma_eps)
    : a_bar_(std::move(a_bar)), b_bar_(std::move(b_bar)), sigma_eps_(std::move(sigma_eps)) {
  require_square(a_bar_, "ExactModel(a_bar)");
  require_square(sigma_eps_, "ExactModel(sigma_eps)");
  if (b_bar_.size() != a_bar_.rows() || sigma_eps_.rows() != a_bar_.rows()) {
    throw ValidationError("ExactModel: dimension mismatch");
  }
  require_hurwitz(a_bar_);
  theta_star_ = a_bar_.partialPivLu().solve(b_bar_);
}

Matrix ExactModel::sigma_inf() const {
  const Eigen::PartialPivLU<Matrix> lu(a_bar_);
  const Matrix a_inv = lu.inverse();
  const Matrix s = a_inv * sigma_eps_ * a_inv.transpose();
  return 0.5 * (s + s.transpose());
}

Vector ExactModel::noise(const Observation& obs) const {
  return (obs.a - a_bar_) * theta_star_ - (obs.b - b_bar_);
}

BurnIn BurnIn::fixed(std::int64_t steps) {
  if (steps < 1) throw ValidationError("BurnIn::fixed: burn-in must be >= 1");
  return BurnIn{steps};
}

const Vector& LsaRun::theta(std::int64_t k) const {
  if (!trajectory) throw ValidationError("LsaRun: trajectory not retained");
  if (k < 0 || k > total_steps()) throw ValidationError("LsaRun: iterate index out of range");
  return (*trajectory)[static_cast<std::size_t>(k)];
}

const Observation& LsaRun::observation(std::int64_t k) const {
  if (!observations) throw ValidationError("LsaRun: observations not retained");
  if (k < 1 || k > total_steps()) throw ValidationError("LsaRun: observation index out of range");
  return (*observations)[static_cast<std::size_t>(k - 1)];
}

void guard_iterate(const Vector& theta, std::int64_t step, std::int64_t replica) {
  const double norm = theta.norm();
  if (std::isfinite(norm) && norm <= kDivergenceNorm) return;
  std::ostringstream os;
  os << "LSA diverged at step " << step;
  if (replica >= 0) os << " in bootstrap replica " << replica;
  os << " (|theta| = " << norm << ")";
  throw DivergenceError(os.str(), step, replica);
}

LsaRun run_lsa(const LsaProblem& p, const StepSchedule& s, std::int64_t n, const Vector& theta0,
               RngStream& rng, const RunOptions& options) {
  if (n < 1) throw ValidationError("run_lsa: n must be >= 1");
  const Eigen::Index d = p.dim();
  if (theta0.size() != d) throw ValidationError("run_lsa: theta0 dimension mismatch");

  LsaRun run;
  run.n = n;
  run.burn_in = options.burn_in.steps_for(n);
  const std::int64_t total = run.total_steps();
  if (options.retain) {
    run.trajectory.emplace();
    run.observations.emplace();
    run.trajectory->reserve(static_cast<std::size_t>(total + 1));
    run.observations->reserve(static_cast<std::size_t>(total));
    run.trajectory->push_back(theta0);
  }

  Vector theta = theta0;
  Vector scratch(d);
  Observation obs = Observation::zeros(d);
  KahanVectorSum average(d);

  for (std::int64_t k = 1; k <= total; ++k) {
    p.sample(rng, obs);
    lsa_update(theta, obs, s.at(k), scratch);
    guard_iterate(theta, k);
    if (options.retain) {
      run.trajectory->push_back(theta);
      run.observations->push_back(obs);
    }
    if (k == run.burn_in) run.theta_at_n = theta;
    if (k >= run.burn_in && k < total) average.add(theta);
  }
  run.theta_at_2n = theta;
  run.theta_bar = average.sum() / static_cast<double>(n);
  return run;
}

double relative_residual(const Vector& diff, double scale) {
  if (scale == 0.0) return diff.norm() == 0.0 ? 0.0 : INFINITY;
  return diff.norm() / scale;
}

namespace {

const ExactModel& require_exact(const LsaProblem& p, const char* who) {
  const ExactModel* exact = p.exact();
  if (exact == nullptr) throw ValidationError(std::string(who) + ": problem has no exact model");
  return *exact;
}

}  // namespace

double ErrorDecomposition::relative_residual() const {
  const double scale = t_stat.norm() + w.norm() + d1.norm() + d2.norm() + d3.norm() + d4.norm();
  return lsaboot::relative_residual(t_stat - reconstruction(), scale);
}

ErrorDecomposition decompose_error(const LsaRun& run, const LsaProblem& p, const StepSchedule& s) {
  if (!run.retained()) throw ValidationError("decompose_error: run must retain trajectory and observations");
  const ExactModel& exact = require_exact(p, "decompose_error");
  if (run.burn_in < 1) throw ValidationError("decompose_error: burn-in must be >= 1");

  const Eigen::Index d = p.dim();
  const Vector& star = exact.theta_star();
  const double root_n = std::sqrt(static_cast<double>(run.n));
  const std::int64_t first = run.burn_in + 1;
  const std::int64_t last = run.total_steps();

  ErrorDecomposition out;
  out.t_stat = root_n * (exact.a_bar() * (run.theta_bar - star));
  out.w = Vector::Zero(d);
  out.d3 = Vector::Zero(d);
  out.d4 = Vector::Zero(d);
  for (std::int64_t k = first; k <= last; ++k) {
    const Observation& obs = run.observation(k);
    const Vector prev_err = run.theta(k - 1) - star;
    out.w += exact.noise(obs);
    out.d3 += (obs.a - exact.a_bar()) * prev_err;
    out.d4 += prev_err * (1.0 / s.at(k) - 1.0 / s.at(k - 1));
  }
  out.w /= root_n;
  out.d3 /= root_n;
  out.d4 /= root_n;
  out.d1 = (run.theta(run.burn_in) - star) / (root_n * s.at(run.burn_in));
  out.d2 = (run.theta(last) - star) / (root_n * s.at(last));
  return out;
}

Matrix gamma_product(std::span<const Observation> observations, const StepSchedule& s,
                     std::int64_t m, std::int64_t k) {
  if (m < 1) throw ValidationError("gamma_product: m must be >= 1");
  if (observations.empty()) throw ValidationError("gamma_product: no observations");
  const Eigen::Index d = observations.front().a.rows();
  Matrix prod = Matrix::Identity(d, d);
  if (m > k) return prod;
  if (k > static_cast<std::int64_t>(observations.size())) {
    throw ValidationError("gamma_product: index outside the retained range");
  }
  for (std::int64_t i = m; i <= k; ++i) {
    const Matrix& a = observations[static_cast<std::size_t>(i - 1)].a;
    prod = (Matrix::Identity(d, d) - s.at(i) * a) * prod;
  }
  return prod;
}

ExpansionTerms expansion_terms(const LsaRun& run, const LsaProblem& p, const StepSchedule& s,
                               int depth) {
  if (!run.retained()) throw ValidationError("expansion_terms: run must retain trajectory and observations");
  if (depth < 0) throw ValidationError("expansion_terms: depth must be >= 0");
  const ExactModel& exact = require_exact(p, "expansion_terms");

  const Eigen::Index d = p.dim();
  const Vector& star = exact.theta_star();
  const Matrix& a_bar = exact.a_bar();
  const auto total = static_cast<std::size_t>(run.total_steps());
  const auto levels = static_cast<std::size_t>(depth) + 1;

  ExpansionTerms out;
  out.error.reserve(total + 1);
  out.transient.reserve(total + 1);
  out.j.assign(levels, {});
  out.h.assign(levels, {});
  for (std::size_t l = 0; l < levels; ++l) {
    out.j[l].reserve(total + 1);
    out.h[l].reserve(total + 1);
    out.j[l].push_back(Vector::Zero(d));
    out.h[l].push_back(Vector::Zero(d));
  }
  out.error.push_back(run.theta(0) - star);
  out.transient.push_back(run.theta(0) - star);

  for (std::size_t k = 1; k <= total; ++k) {
    const auto step = static_cast<std::int64_t>(k);
    const Observation& obs = run.observation(step);
    const double alpha = s.at(step);
    const Matrix centered = obs.a - a_bar;
    const Vector eps = exact.noise(obs);

    out.error.push_back(run.theta(step) - star);
    out.transient.push_back(out.transient[k - 1] - alpha * (obs.a * out.transient[k - 1]));

    // J^0_k = (I - a A_bar) J^0_{k-1} - a eps_k
    // J^l_k = (I - a A_bar) J^l_{k-1} - a (A_k - A_bar) J^{l-1}_{k-1}
    // H^l_k = (I - a A_k) H^l_{k-1} - a (A_k - A_bar) J^l_{k-1}
    for (std::size_t l = 0; l < levels; ++l) {
      const Vector& j_prev = out.j[l][k - 1];
      Vector j_next = j_prev - alpha * (a_bar * j_prev);
      if (l == 0) {
        j_next -= alpha * eps;
      } else {
        j_next -= alpha * (centered * out.j[l - 1][k - 1]);
      }
      const Vector& h_prev = out.h[l][k - 1];
      Vector h_next = h_prev - alpha * (obs.a * h_prev) - alpha * (centered * j_prev);
      out.j[l].push_back(std::move(j_next));
      out.h[l].push_back(std::move(h_next));
    }
  }
  return out;
}

double ExpansionTerms::fluctuation_residual() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < error.size(); ++k) {
    const Vector diff = error[k] - transient[k] - j[0][k] - h[0][k];
    const double scale = error[k].norm() + transient[k].norm() + j[0][k].norm() + h[0][k].norm();
    worst = std::max(worst, relative_residual(diff, scale));
  }
  return worst;
}

double ExpansionTerms::nested_residual() const {
  const std::size_t top = j.size() - 1;
  double worst = 0.0;
  for (std::size_t k = 0; k < error.size(); ++k) {
    Vector diff = h[0][k] - h[top][k];
    double scale = h[0][k].norm() + h[top][k].norm();
    for (std::size_t l = 1; l <= top; ++l) {
      diff -= j[l][k];
      scale += j[l][k].norm();
    }
    worst = std::max(worst, relative_residual(diff, scale));
  }
  return worst;
}

double ExpansionTerms::full_residual() const {
  const std::size_t top = j.size() - 1;
  double worst = 0.0;
  for (std::size_t k = 0; k < error.size(); ++k) {
    Vector diff = error[k] - transient[k] - h[top][k];
    double scale = error[k].norm() + transient[k].norm() + h[top][k].norm();
    for (std::size_t l = 0; l <= top; ++l) {
      diff -= j[l][k];
      scale += j[l][k].norm();
    }
    worst = std::max(worst, relative_residual(diff, scale));
  }
  return worst;
}

}  // namespace lsaboot
