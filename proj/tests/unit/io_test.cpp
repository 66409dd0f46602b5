#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lsaboot/config.hpp"
#include "lsaboot/error.hpp"
#include "lsaboot/experiment.hpp"
#include "lsaboot/mdp_io.hpp"
#include "lsaboot/report.hpp"

namespace lsaboot {
namespace {

IniDocument parse_ini(const std::string& text) {
  std::istringstream in(text);
  return IniDocument::parse(in, "t.ini");
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(MdpIo, RoundTripIsExact) {
  RngStream rng(3, 0);
  const GarnetMdp mdp = generate_garnet(6, 3, 2, 0.85, rng);
  RngStream prng(3, 1);
  const Policy pi = random_policy(mdp, prng);
  std::stringstream buf;
  write_mdp(buf, mdp, &pi);
  const MdpFile back = read_mdp(buf, "buf");
  EXPECT_EQ(back.mdp.transitions(), mdp.transitions());
  EXPECT_EQ(back.mdp.rewards(), mdp.rewards());
  EXPECT_EQ(back.mdp.discount(), mdp.discount());
  EXPECT_EQ(back.mdp.branching(), 2);
  ASSERT_TRUE(back.policy.has_value());
  EXPECT_EQ(back.policy->probs(), pi.probs());

  std::stringstream again;
  write_mdp(again, back.mdp, &*back.policy);
  EXPECT_EQ(again.str(), buf.str());
}

TEST(MdpIo, PolicyIsOptionalAndCommentsAreIgnored) {
  std::istringstream in(
      "# two states\nstates 2\nactions 1\nbranching 2\ndiscount 0.5\n"
      "reward 0 0 1\nreward 1 0 0  # trailing\n"
      "transition 0 0 0 0.5\ntransition 0 0 1 0.5\ntransition 1 0 0 0.25\ntransition 1 0 1 0.75\n");
  const MdpFile f = read_mdp(in);
  EXPECT_FALSE(f.policy.has_value());
  EXPECT_EQ(f.mdp.transition(1, 0, 1), 0.75);
  EXPECT_EQ(f.mdp.reward(0, 0), 1.0);
}

TEST(MdpIo, ErrorsCarryLineNumbers) {
  std::istringstream bad_record("states 2\nactions 1\nbranching 2\nfrobnicate 1\n");
  EXPECT_NE(error_of([&] { read_mdp(bad_record, "m.mdp"); }).find("m.mdp:4"), std::string::npos);
  std::istringstream out_of_range("states 2\nactions 1\nbranching 1\ndiscount 0.5\ntransition 0 0 5 1\n");
  EXPECT_NE(error_of([&] { read_mdp(out_of_range, "m.mdp"); }).find("m.mdp:5"), std::string::npos);
  std::istringstream bad_rows("states 2\nactions 1\nbranching 1\ndiscount 0.5\nreward 0 0 0\nreward 1 0 0\n"
                              "transition 0 0 1 0.5\ntransition 1 0 0 1\n");
  EXPECT_THROW(read_mdp(bad_rows, "m.mdp"), ValidationError);
  EXPECT_THROW(read_mdp(std::filesystem::path("/nonexistent/x.mdp")), IoError);
}

TEST(Ini, SectionsOverridesAndOrigins) {
  IniDocument doc = parse_ini("# c\n[problem]\nstates = 7\n\n[run]\nreplicas=10 # inline\n");
  ASSERT_NE(doc.find("problem.states"), nullptr);
  EXPECT_EQ(doc.find("problem.states")->value, "7");
  EXPECT_EQ(doc.find("problem.states")->origin, "t.ini:3");
  EXPECT_EQ(doc.find("run.replicas")->value, "10");
  doc.set_override("run.replicas=20");
  EXPECT_EQ(doc.find("run.replicas")->value, "20");
  EXPECT_EQ(doc.find("run.replicas")->origin, "--set run.replicas");
  EXPECT_EQ(resolve_config(doc).replicas, 20);
  EXPECT_THROW(doc.set_override("nothing"), ValidationError);
  EXPECT_THROW(parse_ini("[problem\n"), ValidationError);
  EXPECT_THROW(parse_ini("[run]\njust words\n"), ValidationError);
}

TEST(Ini, UnknownKeysAndBadValuesNameTheirOrigin) {
  const std::string unknown = error_of([] { resolve_config(parse_ini("[problem]\ncolour = red\n")); });
  EXPECT_NE(unknown.find("t.ini:2"), std::string::npos);
  EXPECT_NE(unknown.find("problem.colour"), std::string::npos);
  const std::string bad = error_of([] { resolve_config(parse_ini("[run]\nreplicas = many\n")); });
  EXPECT_NE(bad.find("t.ini:2"), std::string::npos);
  EXPECT_THROW(resolve_config(parse_ini("[run]\nn_grid = 400, 100\n")), ValidationError);
  EXPECT_THROW(resolve_config(parse_ini("[run]\nburn_in = sometimes\n")), ValidationError);
  EXPECT_THROW(resolve_config(parse_ini("[bootstrap]\nlaw = rademacher\n")), ValidationError);
  EXPECT_THROW(resolve_config(parse_ini("[problem]\nkind = mdp_file\n")), ValidationError);
}

TEST(Ini, DefaultsAndCanonicalRoundTrip) {
  const ExperimentConfig d = resolve_config(IniDocument{});
  EXPECT_FALSE(d.c0.has_value());
  EXPECT_EQ(d.n_grid, (std::vector<std::int64_t>{400, 1600, 6400}));
  EXPECT_EQ(d.replicas, 20000);
  EXPECT_EQ(d.b_count, 200);

  const ExperimentConfig c = resolve_config(parse_ini(
      "[problem]\nkind = garnet\nstates = 9\nfeatures = random:3\ndiscount = 0.95\n"
      "[schedule]\nc0 = 0.125\ngammas = 0.5, 0.75\n"
      "[run]\nn_grid = 10,20\nburn_in = fixed:7\ntheta0 = star\nself_test = true\nworkers = 3\n"
      "[bootstrap]\nb = 50\nlevels = 0.8,0.95\nlaw = two-point\nruns = 9\n[seeds]\ndata = 4\nweight = 5\n"));
  EXPECT_EQ(c.problem.feature_dim, 3);
  EXPECT_EQ(c.c0, 0.125);
  EXPECT_EQ(c.burn_in.fixed_steps, 7);
  EXPECT_EQ(c.theta0, Theta0::star);
  EXPECT_EQ(c.law, WeightLaw::two_point);
  EXPECT_EQ(c.workers, 3u);
  const std::string text = to_ini(c);
  EXPECT_EQ(text.find("workers"), std::string::npos);
  EXPECT_EQ(to_ini(resolve_config(parse_ini(text))), text);
}

TEST(Csv, FormatAndRoundTrip) {
  EXPECT_EQ(to_csv({{"a", "b"}, {}}), "a,b\n");
  const CsvTable t{{"name", "value"}, {{"plain", "1.5"}, {"with,comma", "say \"hi\""}}};
  const std::string text = to_csv(t);
  EXPECT_NE(text.find("\"with,comma\""), std::string::npos);
  const CsvTable back = parse_csv(text);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(Report, TablesHaveDocumentedColumns) {
  const std::vector<NormalApproxRow> rows{{0.5, 400, 0.1, 0.2, 0.2 * std::pow(400.0, 0.25), 1.0, 3.0}};
  EXPECT_EQ(normal_approx_table(rows).header,
            (std::vector<std::string>{"gamma", "n", "c0", "delta_n", "delta_n_scaled", "mean_scaled_error"}));
  EXPECT_EQ(normal_approx_timing(rows).header, (std::vector<std::string>{"gamma", "n", "runtime_seconds"}));
  EXPECT_EQ(coverage_table({}).header,
            (std::vector<std::string>{"level", "n", "B", "coverage", "binomial_lo", "binomial_hi"}));
  EXPECT_EQ(coverage_runs_table({}).header,
            (std::vector<std::string>{"run_id", "n", "B", "level", "radius", "covered"}));
}

TEST(Report, SvgIsDeterministicAndWellFormed) {
  LineChart chart{"t <&>", "n", "y", {{"g=0.5", {400, 1600, 6400}, {0.9, 0.5, 0.2}}}, true};
  const std::string a = render_svg(chart);
  EXPECT_EQ(a, render_svg(chart));
  EXPECT_EQ(a.rfind("<svg", 0) == 0 || a.rfind("<?xml", 0) == 0, true);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_NE(a.find("&lt;&amp;&gt;"), std::string::npos);
  EXPECT_EQ(normal_approx_charts({}).size(), 2u);
}

TEST(Report, WriteTextFileCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "lsaboot_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_text_file(dir / "f.txt", "hello\n");
  std::ifstream in(dir / "f.txt");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "hello");
  std::filesystem::remove_all(dir.parent_path());
}

ExperimentConfig small_synthetic() {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::synthetic;
  c.problem.dim = 2;
  c.problem.seed = 8;
  c.c0 = 0.5;
  c.gammas = {0.5, 0.7};
  c.n_grid = {64, 256};
  c.replicas = 300;
  c.reference_sample = 3000;
  c.b_count = 20;
  c.runs = 12;
  c.data_seed = 21;
  c.weight_seed = 22;
  return c;
}

TEST(Experiment, AutoStepSizeRespectsCertificate) {
  ExperimentConfig c = small_synthetic();
  c.c0.reset();
  const ProblemInstance inst = build_problem(c.problem);
  const double c0 = resolve_c0(c, inst.certificate, 0.5);
  EXPECT_LE(c0, inst.certificate.alpha_inf);
  EXPECT_LE(c0, inst.certificate.a);
  EXPECT_LE(c0, 0.5);
  EXPECT_GT(c0, 0.0);
  c.theta0 = Theta0::star;
  EXPECT_EQ(initial_point(c, *inst.problem), inst.problem->exact()->theta_star());
}

TEST(Experiment, GarnetInstanceCarriesTdData) {
  ExperimentConfig c;
  const ProblemInstance inst = build_problem(c.problem);
  ASSERT_NE(inst.td, nullptr);
  EXPECT_EQ(inst.problem->dim(), 5);
  EXPECT_GT(inst.certificate.a, 0.0);
}

TEST(Experiment, NormalApproxOutputIndependentOfWorkers) {
  ExperimentConfig c = small_synthetic();
  const ProblemInstance inst = build_problem(c.problem);
  c.workers = 1;
  const auto one = run_normal_approx(c, *inst.problem, inst.certificate);
  c.workers = 3;
  const auto three = run_normal_approx(c, *inst.problem, inst.certificate);
  ASSERT_EQ(one.size(), 4u);
  EXPECT_EQ(to_csv(normal_approx_table(one)), to_csv(normal_approx_table(three)));
  for (const auto& row : one) {
    EXPECT_GE(row.delta_n, 0.0);
    EXPECT_LE(row.delta_n, 1.0);
    EXPECT_NEAR(row.delta_n_scaled, row.delta_n * std::pow(static_cast<double>(row.n), 0.25), 1e-12);
  }
}

TEST(Experiment, SelfTestStaysWithinKsCriticalValue) {
  ExperimentConfig c = small_synthetic();
  c.self_test = true;
  c.replicas = 4000;
  c.reference_sample = 20000;
  const ProblemInstance inst = build_problem(c.problem);
  const double critical = 1.63 * std::sqrt(1.0 / 4000 + 1.0 / 20000);
  for (const auto& row : run_normal_approx(c, *inst.problem, inst.certificate)) {
    EXPECT_LE(row.delta_n, critical) << row.gamma << " " << row.n;
  }
}

TEST(Experiment, CoverageOutputIndependentOfWorkers) {
  ExperimentConfig c = small_synthetic();
  const ProblemInstance inst = build_problem(c.problem);
  c.workers = 1;
  const CoverageTables one = run_coverage(c, *inst.problem, inst.certificate);
  c.workers = 2;
  const CoverageTables two = run_coverage(c, *inst.problem, inst.certificate);
  EXPECT_EQ(to_csv(coverage_table(one.summary)), to_csv(coverage_table(two.summary)));
  EXPECT_EQ(to_csv(coverage_runs_table(one.runs)), to_csv(coverage_runs_table(two.runs)));
  EXPECT_EQ(one.summary.size(), 2u);
  EXPECT_EQ(one.runs.size(), 2u * 12u);
}

TEST(Experiment, CertifyReportsEveryCell) {
  ExperimentConfig c = small_synthetic();
  const ProblemInstance inst = build_problem(c.problem);
  const CertifyReport r = run_certify(c, *inst.problem, inst.certificate);
  EXPECT_EQ(r.rows.size(), 4u);
  EXPECT_FALSE(certify_table(r.rows).header.empty());
}

}  // namespace
}  // namespace lsaboot
