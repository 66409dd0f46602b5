#include "lsaboot/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/distributions/beta.hpp>

#include "lsaboot/error.hpp"
#include "lsaboot/parallel.hpp"

namespace lsaboot {

double sample_weight(WeightLaw law, RngStream& rng) {
  switch (law) {
    case WeightLaw::gaussian:
      return 1.0 + rng.normal();
    case WeightLaw::two_point:
      return (rng() & 1u) != 0u ? 2.0 : 0.0;
    case WeightLaw::exponential:
      return rng.exponential();
    case WeightLaw::unit:
      return 1.0;
  }
  return 1.0;
}

std::string_view to_string(WeightLaw law) {
  switch (law) {
    case WeightLaw::gaussian:
      return "gaussian";
    case WeightLaw::two_point:
      return "two-point";
    case WeightLaw::exponential:
      return "exponential";
    case WeightLaw::unit:
      return "unit";
  }
  return "?";
}

WeightLaw parse_weight_law(std::string_view name) {
  if (name == "gaussian" || name == "gaussian-mean1") return WeightLaw::gaussian;
  if (name == "two-point") return WeightLaw::two_point;
  if (name == "exponential") return WeightLaw::exponential;
  if (name == "unit") return WeightLaw::unit;
  throw ValidationError("unknown weight law '" + std::string(name) + "'");
}

Statistic Statistic::linear_functional(Vector c) {
  if (c.size() == 0 || !c.allFinite()) throw ValidationError("Statistic: invalid functional");
  Statistic s;
  s.functional_ = std::move(c);
  return s;
}

double Statistic::operator()(const Vector& x) const {
  if (!functional_) return x.norm();
  if (functional_->size() != x.size()) throw ValidationError("Statistic: functional dimension mismatch");
  return std::abs(functional_->dot(x));
}

std::vector<double> BootstrapEnsemble::statistics() const {
  const double root_n = std::sqrt(static_cast<double>(main.n));
  std::vector<double> out;
  out.reserve(boot_averages.size());
  for (const Vector& avg : boot_averages) out.push_back(statistic(root_n * (avg - main.theta_bar)));
  return out;
}

BootstrapEnsemble run_bootstrap(const LsaProblem& p, const StepSchedule& s, std::int64_t n,
                                const Vector& theta0, RngStream& data_rng,
                                const BootstrapOptions& options) {
  if (n < 1) throw ValidationError("run_bootstrap: n must be >= 1");
  if (options.b_count < 1) throw ValidationError("run_bootstrap: b_count must be >= 1");
  const Eigen::Index d = p.dim();
  if (theta0.size() != d) throw ValidationError("run_bootstrap: theta0 dimension mismatch");

  const auto replicas = static_cast<std::size_t>(options.b_count);
  BootstrapEnsemble e;
  e.b_count = options.b_count;
  e.statistic = options.statistic;
  LsaRun& run = e.main;
  run.n = n;
  run.burn_in = options.burn_in.steps_for(n);
  const std::int64_t total = run.total_steps();
  if (options.retain) {
    run.trajectory.emplace();
    run.observations.emplace();
    run.trajectory->reserve(static_cast<std::size_t>(total + 1));
    run.observations->reserve(static_cast<std::size_t>(total));
    run.trajectory->push_back(theta0);
    e.traces.emplace(replicas);
  }

  Vector theta = theta0;
  Vector scratch(d);
  Observation obs = Observation::zeros(d);
  KahanVectorSum average(d);

  for (std::int64_t k = 1; k <= run.burn_in; ++k) {
    p.sample(data_rng, obs);
    lsa_update(theta, obs, s.at(k), scratch);
    guard_iterate(theta, k);
    if (options.retain) {
      run.trajectory->push_back(theta);
      run.observations->push_back(obs);
    }
  }
  run.theta_at_n = theta;
  average.add(theta);

  std::vector<Vector> boot(replicas, theta);
  std::vector<KahanVectorSum> boot_sum(replicas, KahanVectorSum(d));
  std::vector<RngStream> weight_rng;
  weight_rng.reserve(replicas);
  for (std::size_t j = 0; j < replicas; ++j) {
    weight_rng.emplace_back(options.weight_seed, j);
    boot_sum[j].add(theta);
    if (options.retain) {
      (*e.traces)[j].trajectory.reserve(static_cast<std::size_t>(n + 1));
      (*e.traces)[j].weights.reserve(static_cast<std::size_t>(n));
      (*e.traces)[j].trajectory.push_back(theta);
    }
  }

  for (std::int64_t k = run.burn_in + 1; k <= total; ++k) {
    p.sample(data_rng, obs);
    const double alpha = s.at(k);
    lsa_update(theta, obs, alpha, scratch);
    guard_iterate(theta, k);
    if (options.retain) {
      run.trajectory->push_back(theta);
      run.observations->push_back(obs);
    }
    if (k < total) average.add(theta);

    for (std::size_t j = 0; j < replicas; ++j) {
      const double w = sample_weight(options.law, weight_rng[j]);
      lsa_update(boot[j], obs, alpha * w, scratch);
      guard_iterate(boot[j], k, static_cast<std::int64_t>(j));
      if (k < total) boot_sum[j].add(boot[j]);
      if (options.retain) {
        (*e.traces)[j].trajectory.push_back(boot[j]);
        (*e.traces)[j].weights.push_back(w);
      }
    }
  }

  run.theta_at_2n = theta;
  run.theta_bar = average.sum() / static_cast<double>(n);
  e.boot_averages.reserve(replicas);
  for (std::size_t j = 0; j < replicas; ++j) {
    e.boot_averages.push_back(boot_sum[j].sum() / static_cast<double>(n));
  }
  return e;
}

bool ConfidenceSet::contains(const Vector& theta) const {
  const double root_n = std::sqrt(static_cast<double>(n));
  return statistic(root_n * (theta - center)) <= radius * root_n;
}

ConfidenceSet confidence_set_from_statistics(const Vector& center, std::int64_t n,
                                             const std::vector<double>& statistics, double level,
                                             Statistic statistic) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence_set: level must lie in (0,1)");
  if (n < 1) throw ValidationError("confidence_set: n must be >= 1");
  const double q = empirical_quantile(EmpiricalSample(statistics), level);
  ConfidenceSet set;
  set.center = center;
  set.n = n;
  set.level = level;
  set.radius = q / std::sqrt(static_cast<double>(n));
  set.statistic = std::move(statistic);
  return set;
}

ConfidenceSet confidence_set(const BootstrapEnsemble& e, double level, std::int64_t min_replicas) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence_set: level must lie in (0,1)");
  if (e.b_count < min_replicas) {
    std::ostringstream os;
    os << "confidence_set: need at least " << min_replicas << " bootstrap replicas, got " << e.b_count;
    throw ValidationError(os.str());
  }
  return confidence_set_from_statistics(e.main.theta_bar, e.main.n, e.statistics(), level, e.statistic);
}

double BootstrapDecomposition::relative_residual() const {
  const double scale =
      t_stat.norm() + w.norm() + d1.norm() + d2.norm() + d3.norm() + d4.norm() + d5.norm();
  return lsaboot::relative_residual(t_stat - reconstruction(), scale);
}

BootstrapDecomposition decompose_bootstrap_error(const BootstrapEnsemble& e, std::size_t replica,
                                                 const LsaProblem& p, const StepSchedule& s) {
  if (!e.main.retained() || !e.traces) {
    throw ValidationError("decompose_bootstrap_error: ensemble was not run with retention");
  }
  if (replica >= e.traces->size()) throw ValidationError("decompose_bootstrap_error: replica out of range");
  const ExactModel* exact = p.exact();
  if (exact == nullptr) throw ValidationError("decompose_bootstrap_error: problem has no exact model");

  const LsaRun& run = e.main;
  const ReplicaTrace& trace = (*e.traces)[replica];
  const Eigen::Index d = p.dim();
  const Vector& star = exact->theta_star();
  const double root_n = std::sqrt(static_cast<double>(run.n));
  const std::int64_t n0 = run.burn_in;
  const std::int64_t last = run.total_steps();
  // trace.trajectory[k - n0] = theta^b_k, trace.weights[k - n0 - 1] = w_k.
  auto boot_theta = [&](std::int64_t k) -> const Vector& { return trace.trajectory[static_cast<std::size_t>(k - n0)]; };

  BootstrapDecomposition out;
  out.t_stat = root_n * (exact->a_bar() * (e.boot_averages[replica] - run.theta_bar));
  out.w = Vector::Zero(d);
  out.d3 = Vector::Zero(d);
  out.d4 = Vector::Zero(d);
  out.d5 = Vector::Zero(d);
  for (std::int64_t k = n0 + 1; k <= last; ++k) {
    const Observation& obs = run.observation(k);
    const double w = trace.weights[static_cast<std::size_t>(k - n0 - 1)];
    const Vector gap = boot_theta(k - 1) - run.theta(k - 1);
    out.w += (w - 1.0) * exact->noise(obs);
    out.d3 += (w - 1.0) * (obs.a * (boot_theta(k - 1) - star));
    out.d4 += gap * (1.0 / s.at(k) - 1.0 / s.at(k - 1));
    out.d5 += (obs.a - exact->a_bar()) * gap;
  }
  out.w /= root_n;
  out.d3 /= root_n;
  out.d4 /= root_n;
  out.d5 /= root_n;
  out.d1 = (boot_theta(n0) - run.theta(n0)) / (root_n * s.at(n0));
  out.d2 = (boot_theta(last) - run.theta(last)) / (root_n * s.at(last));
  return out;
}

Matrix bootstrap_noise_covariance(const LsaRun& run, const LsaProblem& p) {
  if (!run.retained()) throw ValidationError("bootstrap_noise_covariance: run must retain observations");
  const ExactModel* exact = p.exact();
  if (exact == nullptr) throw ValidationError("bootstrap_noise_covariance: problem has no exact model");
  const Eigen::Index d = p.dim();
  Matrix cov = Matrix::Zero(d, d);
  for (std::int64_t k = run.burn_in + 1; k <= run.total_steps(); ++k) {
    const Vector eps = exact->noise(run.observation(k));
    cov.noalias() += eps * eps.transpose();
  }
  return cov / static_cast<double>(run.n);
}

double gaussian_comparison(const Matrix& sigma_eps, const Matrix& sigma_eps_boot) {
  require_square(sigma_eps, "gaussian_comparison");
  require_square(sigma_eps_boot, "gaussian_comparison");
  if (sigma_eps.rows() != sigma_eps_boot.rows()) throw ValidationError("gaussian_comparison: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma_eps + sigma_eps.transpose()));
  const Vector ev = es.eigenvalues();
  if (!(ev.minCoeff() > kPsdTolerance * std::max(1.0, ev.maxCoeff()))) {
    throw ValidationError("gaussian_comparison: Sigma_eps is singular");
  }
  const Matrix inv_sqrt = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                          es.eigenvectors().transpose();
  const Eigen::Index d = sigma_eps.rows();
  const Matrix gap = inv_sqrt * sigma_eps_boot * inv_sqrt - Matrix::Identity(d, d);
  const Vector gap_ev = symmetric_eigenvalues(gap);
  const double op = std::max(std::abs(gap_ev.minCoeff()), std::abs(gap_ev.maxCoeff()));
  return 0.5 * std::sqrt(static_cast<double>(d)) * op;
}

std::pair<double, double> binomial_interval(std::size_t successes, std::size_t trials, double confidence) {
  if (trials == 0 || successes > trials) throw ValidationError("binomial_interval: invalid counts");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("binomial_interval: invalid confidence");
  if (trials == 1) return {0.0, 1.0};
  const double tail = 0.5 * (1.0 - confidence);
  const auto k = static_cast<double>(successes);
  const auto m = static_cast<double>(trials);
  double lo = 0.0, hi = 1.0;
  if (successes > 0) lo = boost::math::ibeta_inv(k, m - k + 1.0, tail);
  if (successes < trials) hi = boost::math::ibeta_inv(k + 1.0, m - k, 1.0 - tail);
  return {lo, hi};
}

double CoverageRun::quantile(double level) const {
  return empirical_quantile(EmpiricalSample(boot_statistics, true), level);
}

CoverageEstimate coverage_at(const std::vector<CoverageRun>& runs, double level, std::int64_t n,
                             std::int64_t b_count) {
  if (runs.empty()) throw ValidationError("coverage_at: no runs");
  CoverageEstimate est;
  est.level = level;
  est.n = n;
  est.b_count = b_count;
  est.runs = runs.size();
  for (const auto& r : runs) est.covered += r.covered(level) ? 1 : 0;
  est.coverage = static_cast<double>(est.covered) / static_cast<double>(est.runs);
  std::tie(est.lo, est.hi) = binomial_interval(est.covered, est.runs);
  return est;
}

CoverageResult evaluate_coverage(const LsaProblem& p, const CoverageConfig& config,
                                 const std::atomic<bool>* stop) {
  const ExactModel* exact = p.exact();
  if (exact == nullptr) throw ValidationError("evaluate_coverage: problem has no exact model");
  if (config.runs == 0) throw ValidationError("evaluate_coverage: runs must be >= 1");
  for (double level : config.levels) {
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("evaluate_coverage: level must lie in (0,1)");
  }
  const Vector theta0 = config.theta0.size() == 0 ? Vector::Zero(p.dim()) : config.theta0;
  const double root_n = std::sqrt(static_cast<double>(config.n));

  CoverageResult result;
  result.runs.resize(config.runs);
  std::vector<char> done(config.runs, 0);
  parallel_for(
      config.runs, config.workers,
      [&](std::size_t r) {
        RngStream data_rng(config.data_seed, r);
        BootstrapOptions opts = config.bootstrap;
        opts.weight_seed = mix_seed(config.bootstrap.weight_seed, r);
        opts.retain = false;
        const BootstrapEnsemble e = run_bootstrap(p, config.schedule, config.n, theta0, data_rng, opts);
        CoverageRun& out = result.runs[r];
        out.run_id = r;
        out.true_statistic = e.statistic(root_n * (e.main.theta_bar - exact->theta_star()));
        out.boot_statistics = e.statistics();
        std::sort(out.boot_statistics.begin(), out.boot_statistics.end());
        done[r] = 1;
      },
      stop);

  // An interrupted evaluation keeps the completed prefix only.
  const auto prefix = static_cast<std::size_t>(std::find(done.begin(), done.end(), 0) - done.begin());
  result.runs.resize(prefix);
  if (result.runs.empty()) return result;
  for (double level : config.levels) {
    result.estimates.push_back(coverage_at(result.runs, level, config.n, config.bootstrap.b_count));
  }
  return result;
}

}  // namespace lsaboot
