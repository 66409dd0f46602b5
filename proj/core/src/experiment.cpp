#include "lsaboot/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "lsaboot/error.hpp"
#include "lsaboot/mdp_io.hpp"
#include "lsaboot/numkit.hpp"
#include "lsaboot/parallel.hpp"
#include "lsaboot/synthetic.hpp"

namespace lsaboot {

namespace {

// Stream tags under the problem seed.
constexpr std::uint64_t kMdpStream = 0;
constexpr std::uint64_t kPolicyStream = 1;
constexpr std::uint64_t kFeatureStream = 2;
constexpr std::uint64_t kSyntheticStream = 3;

// Tags under the data seed.
constexpr std::uint64_t kReferenceTag = 0x5245465ULL;
constexpr std::uint64_t kNoiseTag = 0x4e4f495345ULL;

FeatureMap make_features(const ProblemConfig& c, int n_states) {
  if (c.feature_dim == 0) return FeatureMap::identity(n_states);
  RngStream rng(c.seed, kFeatureStream);
  return FeatureMap::random_projection(n_states, c.feature_dim, rng);
}

ProblemInstance td_instance(GarnetMdp mdp, std::optional<Policy> policy, const ProblemConfig& c,
                            std::string description) {
  if (!policy) {
    RngStream rng(c.seed, kPolicyStream);
    policy = random_policy(mdp, rng);
  }
  const double discount = mdp.discount();
  FeatureMap features = make_features(c, mdp.n_states());
  auto td = std::make_unique<TdProblem>(std::move(mdp), std::move(*policy), std::move(features));
  ProblemInstance out;
  out.certificate = td_certificate(td->truth(), discount);
  out.td = td.get();
  out.problem = std::move(td);
  out.description = std::move(description);
  return out;
}

}  // namespace

ProblemInstance build_problem(const ProblemConfig& c) {
  switch (c.kind) {
    case ProblemKind::garnet: {
      RngStream rng(c.seed, kMdpStream);
      GarnetMdp mdp = generate_garnet(c.states, c.actions, c.branching, c.discount, rng);
      std::ostringstream os;
      os << "garnet states=" << c.states << " actions=" << c.actions << " branching=" << c.branching
         << " discount=" << c.discount;
      return td_instance(std::move(mdp), std::nullopt, c, os.str());
    }
    case ProblemKind::mdp_file: {
      MdpFile file = read_mdp(c.mdp_file);
      return td_instance(std::move(file.mdp), std::move(file.policy), c, "mdp file " + c.mdp_file.string());
    }
    case ProblemKind::synthetic: {
      if (c.dim < 1) throw ValidationError("synthetic problem needs dim >= 1");
      RngStream rng(c.seed, kSyntheticStream);
      Matrix a_bar = random_hurwitz_matrix(c.dim, rng, c.min_real_part);
      Vector b_bar(c.dim);
      for (int i = 0; i < c.dim; ++i) b_bar(i) = rng.normal();
      auto problem = std::make_unique<GaussianLsaProblem>(std::move(a_bar), std::move(b_bar), c.noise_a, c.noise_b);
      ProblemInstance out;
      out.certificate = certify(problem->exact()->a_bar());
      out.problem = std::move(problem);
      out.description = "synthetic gaussian dim=" + std::to_string(c.dim);
      return out;
    }
  }
  throw ValidationError("unknown problem kind");
}

double resolve_c0(const ExperimentConfig& config, const StabilityCertificate& cert, double gamma) {
  if (config.c0) return *config.c0;
  return std::min({cert.alpha_inf, cert.a, 1.0 - gamma});
}

Vector initial_point(const ExperimentConfig& config, const LsaProblem& p) {
  if (config.theta0 == Theta0::star) {
    if (p.exact() == nullptr) throw ValidationError("theta0 = star needs an exact model");
    return p.exact()->theta_star();
  }
  return Vector::Zero(p.dim());
}

std::vector<NormalApproxRow> run_normal_approx(const ExperimentConfig& config, const LsaProblem& p,
                                               const StabilityCertificate& cert, const std::atomic<bool>* stop) {
  const ExactModel* exact = p.exact();
  if (exact == nullptr) throw ValidationError("normal-approx needs a problem with exact ground truth");
  const Matrix root = sqrtm_psd(exact->sigma_inf());
  const Vector theta0 = initial_point(config, p);
  const Eigen::Index d = p.dim();

  auto gaussian_norms = [&](RngStream& rng, std::int64_t count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    Vector eta(d);
    for (auto& v : out) {
      for (Eigen::Index i = 0; i < d; ++i) eta(i) = rng.normal();
      v = (root * eta).norm();
    }
    return out;
  };

  RngStream reference_rng(mix_seed(config.data_seed, kReferenceTag), 0);
  const EmpiricalSample reference(gaussian_norms(reference_rng, config.reference_sample));
  const EmpiricalSample reference_sorted = reference.sorted();

  std::vector<NormalApproxRow> rows;
  for (std::size_t g = 0; g < config.gammas.size(); ++g) {
    const double gamma = config.gammas[g];
    const StepSchedule schedule(resolve_c0(config, cert, gamma), gamma);
    RunOptions options;
    options.burn_in = config.burn_in;
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
      if (stop != nullptr && stop->load()) return rows;
      const auto start = std::chrono::steady_clock::now();
      const std::int64_t n = config.n_grid[i];
      const std::uint64_t cell_seed = mix_seed(mix_seed(config.data_seed, g + 1), i + 1);
      const double root_n = std::sqrt(static_cast<double>(n));

      std::vector<double> errors(static_cast<std::size_t>(config.replicas));
      if (config.self_test) {
        RngStream rng(cell_seed, 0);
        errors = gaussian_norms(rng, config.replicas);
      } else {
        std::vector<char> done(errors.size(), 0);
        parallel_for(
            errors.size(), config.workers,
            [&](std::size_t r) {
              RngStream rng(cell_seed, r);
              const LsaRun run = run_lsa(p, schedule, n, theta0, rng, options);
              errors[r] = root_n * (run.theta_bar - exact->theta_star()).norm();
              done[r] = 1;
            },
            stop);
        if (std::find(done.begin(), done.end(), 0) != done.end()) return rows;
      }

      // Sum in index order so the mean does not depend on scheduling.
      double total = 0.0;
      for (double e : errors) total += e;

      NormalApproxRow row;
      row.gamma = gamma;
      row.n = n;
      row.c0 = schedule.c0();
      row.mean_scaled_error = total / static_cast<double>(errors.size());
      row.delta_n = ks_two_sample(EmpiricalSample(std::move(errors)), reference_sorted);
      row.delta_n_scaled = row.delta_n * std::pow(static_cast<double>(n), 0.25);
      row.runtime_seconds =
          std::max(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1e-9);
      rows.push_back(row);
    }
  }
  return rows;
}

CoverageTables run_coverage(const ExperimentConfig& config, const LsaProblem& p,
                            const StabilityCertificate& cert, const std::atomic<bool>* stop) {
  if (p.exact() == nullptr) throw ValidationError("coverage needs a problem with exact ground truth");
  CoverageTables out;
  out.gamma = config.gammas.front();
  out.c0 = resolve_c0(config, cert, out.gamma);

  CoverageConfig cc;
  cc.schedule = StepSchedule(out.c0, out.gamma);
  cc.theta0 = initial_point(config, p);
  cc.bootstrap.b_count = config.b_count;
  cc.bootstrap.law = config.law;
  cc.bootstrap.weight_seed = config.weight_seed;
  cc.bootstrap.burn_in = config.burn_in;
  cc.levels = config.levels;
  cc.runs = static_cast<std::size_t>(config.runs);
  cc.workers = config.workers;

  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    if (stop != nullptr && stop->load()) break;
    cc.n = config.n_grid[i];
    cc.data_seed = mix_seed(config.data_seed, i + 1);
    CoverageResult result = evaluate_coverage(p, cc, stop);
    if (result.runs.empty()) break;
    for (const auto& est : result.estimates) {
      out.summary.push_back({est.level, est.n, est.b_count, est.coverage, est.lo, est.hi});
    }
    const double root_n = std::sqrt(static_cast<double>(cc.n));
    for (const auto& run : result.runs) {
      for (double level : config.levels) {
        out.runs.push_back({run.run_id, cc.n, config.b_count, level, run.quantile(level) / root_n, run.covered(level)});
      }
    }
    const bool partial = result.runs.size() < cc.runs;
    out.results.push_back(std::move(result));
    if (partial) break;
  }
  return out;
}

CertifyReport run_certify(const ExperimentConfig& config, const LsaProblem& p, const StabilityCertificate& cert) {
  CertifyReport report;
  report.certificate = cert;
  RngStream rng(mix_seed(config.data_seed, kNoiseTag), 0);
  report.noise = noise_stats(p, rng, 100000);
  for (double gamma : config.gammas) {
    const StepSchedule schedule(resolve_c0(config, cert, gamma), gamma);
    const AcceptanceReport sched = check_schedule(schedule, cert);
    for (const auto& v : sched.violations) report.violations.push_back("gamma " + std::to_string(gamma) + ": " + v);
    for (std::int64_t n : config.n_grid) {
      const AcceptanceReport size = check_sample_size(schedule, cert, report.noise, n, p.dim());
      CertifyRow row;
      row.gamma = gamma;
      row.c0 = schedule.c0();
      row.n = n;
      row.schedule_ok = sched.passed;
      row.sample_size_ok = size.passed;
      row.lhs = size.lhs;
      row.threshold = size.threshold;
      row.minimal_n = size.minimal_n ? *size.minimal_n : -1;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace lsaboot
