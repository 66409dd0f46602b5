#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lsaboot/config.hpp"
#include "lsaboot/error.hpp"
#include "lsaboot/experiment.hpp"
#include "lsaboot/mdp_io.hpp"
#include "lsaboot/report.hpp"
#include "lsaboot/text.hpp"

namespace fs = std::filesystem;
using namespace lsaboot;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out_dir = "results";
};

ExperimentConfig load(const GlobalOptions& g) {
  IniDocument doc;
  if (!g.config_path.empty()) doc = IniDocument::load(g.config_path);
  for (const auto& o : g.overrides) doc.set_override(o);
  if (g.seed) {
    doc.set("seeds.data", std::to_string(*g.seed), "--seed");
    doc.set("seeds.weight", std::to_string(*g.seed + 1), "--seed");
  }
  if (g.workers) doc.set("run.workers", std::to_string(*g.workers), "--workers");
  return resolve_config(doc);
}

void write_common(const fs::path& out, const ExperimentConfig& config, const ProblemInstance& inst) {
  write_text_file(out / "resolved_config.ini", to_ini(config));
  if (inst.td != nullptr) {
    std::ostringstream os;
    write_mdp(os, inst.td->mdp(), &inst.td->policy());
    write_text_file(out / "problem.mdp", os.str());
  }
}

void warn_if_outside_bounds(const ExperimentConfig& config, const StabilityCertificate& cert) {
  for (double gamma : config.gammas) {
    const double c0 = resolve_c0(config, cert, gamma);
    const AcceptanceReport r = check_schedule(StepSchedule(c0, gamma), cert);
    for (const auto& v : r.violations) {
      std::cerr << "warning: c0=" << format_double(c0) << " gamma=" << format_double(gamma)
                << " is outside the step-size conditions: " << v << '\n';
    }
  }
}

int normal_approx(const GlobalOptions& g) {
  const ExperimentConfig config = load(g);
  const ProblemInstance inst = build_problem(config.problem);
  const fs::path out = g.out_dir;
  write_common(out, config, inst);
  std::cout << "problem: " << inst.description << '\n';
  warn_if_outside_bounds(config, inst.certificate);
  const auto rows = run_normal_approx(config, *inst.problem, inst.certificate, &g_interrupted);
  write_text_file(out / "normal_approx.csv", to_csv(normal_approx_table(rows)));
  write_text_file(out / "normal_approx_timing.csv", to_csv(normal_approx_timing(rows)));
  for (const auto& [name, chart] : normal_approx_charts(rows)) write_text_file(out / name, render_svg(chart));
  for (const auto& r : rows) {
    std::cout << "gamma=" << format_double(r.gamma) << " n=" << r.n << " c0=" << format_double(r.c0)
              << " delta_n=" << format_double(r.delta_n) << " scaled=" << format_double(r.delta_n_scaled)
              << " (" << r.runtime_seconds << " s)\n";
  }
  return g_interrupted.load() ? 130 : 0;
}

int coverage(const GlobalOptions& g) {
  const ExperimentConfig config = load(g);
  const ProblemInstance inst = build_problem(config.problem);
  const fs::path out = g.out_dir;
  write_common(out, config, inst);
  std::cout << "problem: " << inst.description << '\n';
  ExperimentConfig first = config;
  first.gammas.resize(1);
  warn_if_outside_bounds(first, inst.certificate);
  const CoverageTables tables = run_coverage(config, *inst.problem, inst.certificate, &g_interrupted);
  write_text_file(out / "coverage.csv", to_csv(coverage_table(tables.summary)));
  write_text_file(out / "coverage_runs.csv", to_csv(coverage_runs_table(tables.runs)));
  write_text_file(out / "coverage.svg", render_svg(coverage_chart(tables.summary)));
  for (const auto& r : tables.summary) {
    std::cout << "level=" << format_double(r.level) << " n=" << r.n << " B=" << r.b_count
              << " coverage=" << format_double(r.coverage) << " [" << format_double(r.binomial_lo) << ", "
              << format_double(r.binomial_hi) << "]\n";
  }
  return g_interrupted.load() ? 130 : 0;
}

int certify_cmd(const GlobalOptions& g) {
  const ExperimentConfig config = load(g);
  const ProblemInstance inst = build_problem(config.problem);
  const fs::path out = g.out_dir;
  write_common(out, config, inst);
  const CertifyReport report = run_certify(config, *inst.problem, inst.certificate);
  write_text_file(out / "certify.csv", to_csv(certify_table(report.rows)));

  const StabilityCertificate& c = report.certificate;
  std::ostringstream os;
  os << "problem: " << inst.description << '\n'
     << "a = " << format_double(c.a) << '\n'
     << "alpha_inf = " << format_double(c.alpha_inf) << '\n'
     << "kappa_Q = " << format_double(c.kappa_q) << '\n'
     << "|A_bar|_Q = " << format_double(c.a_bar_q_norm) << '\n'
     << "worst contraction slack = " << format_double(c.worst_contraction_slack) << '\n'
     << "b_A = " << format_double(report.noise.b_a) << '\n'
     << "|eps|_inf = " << format_double(report.noise.eps_inf) << '\n'
     << "lambda_min(Sigma_eps) = " << format_double(report.noise.lambda_min_eps) << '\n'
     << "noise statistics " << (report.noise.enumerated ? "enumerated exactly" : "estimated by sampling") << '\n';
  if (inst.td != nullptr) {
    const TdConstants k = td_constants(inst.td->truth(), inst.td->mdp().discount());
    os << "td b_A = " << format_double(k.b_a) << '\n'
       << "td |eps|_inf = " << format_double(k.eps_inf) << '\n'
       << "td a = " << format_double(k.a) << '\n'
       << "td alpha_inf = " << format_double(k.alpha_inf) << '\n';
  }
  for (const auto& r : report.rows) {
    os << "gamma=" << format_double(r.gamma) << " c0=" << format_double(r.c0) << " n=" << r.n
       << " schedule=" << (r.schedule_ok ? "ok" : "FAIL") << " sample_size=" << (r.sample_size_ok ? "ok" : "FAIL")
       << " minimal_n=" << (r.minimal_n < 0 ? std::string("none") : std::to_string(r.minimal_n)) << '\n';
  }
  for (const auto& v : report.violations) os << "violation: " << v << '\n';
  write_text_file(out / "certify.txt", os.str());
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Averaged linear stochastic approximation with multiplier-bootstrap inference"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Data seed; the weight seed becomes seed + 1");
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads")->check(CLI::Range(1u, 4096u));
  app.add_option("--out-dir", g.out_dir, "Output directory");

  int (*handler)(const GlobalOptions&) = nullptr;
  auto add = [&](const char* name, const char* help, int (*fn)(const GlobalOptions&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", g.config_path, "Config file (INI sections)")->check(CLI::ExistingFile);
    sub->add_option("--set", g.overrides, "Override, section.key=value (repeatable)");
    sub->callback([&handler, fn] { handler = fn; });
    sub->fallthrough();
  };
  add("normal-approx", "Kolmogorov distance of sqrt(n)|theta_bar - theta*| to its Gaussian limit", normal_approx);
  add("coverage", "Empirical coverage of bootstrap confidence sets", coverage);
  add("certify", "Stability certificate and step/sample-size checks", certify_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*seed_opt) g.seed = seed;
  if (*workers_opt) g.workers = workers;

  std::signal(SIGINT, on_sigint);
  try {
    return handler(g);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
