#include <benchmark/benchmark.h>

#include "lsaboot/bootstrap.hpp"
#include "lsaboot/numkit.hpp"
#include "lsaboot/synthetic.hpp"
#include "lsaboot/td_garnet.hpp"

namespace {

using namespace lsaboot;

TdProblem desk_problem() {
  RngStream rng(1, 0);
  GarnetMdp mdp = generate_garnet(5, 2, 2, 0.8, rng);
  RngStream policy_rng(1, 1);
  Policy policy = random_policy(mdp, policy_rng);
  return TdProblem(std::move(mdp), std::move(policy), FeatureMap::identity(5));
}

void BM_TdSample(benchmark::State& state) {
  const TdProblem p = desk_problem();
  RngStream rng(7, 0);
  Observation obs = Observation::zeros(p.dim());
  for (auto _ : state) {
    p.sample(rng, obs);
    benchmark::DoNotOptimize(obs.a.data());
  }
}
BENCHMARK(BM_TdSample);

void BM_RunLsaTd(benchmark::State& state) {
  const TdProblem p = desk_problem();
  const StepSchedule s(0.5, 0.5);
  const Vector theta0 = Vector::Zero(p.dim());
  std::uint64_t id = 0;
  for (auto _ : state) {
    RngStream rng(3, id++);
    benchmark::DoNotOptimize(run_lsa(p, s, state.range(0), theta0, rng).theta_bar.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_RunLsaTd)->Arg(400)->Arg(1600)->Arg(6400);

void BM_RunBootstrap(benchmark::State& state) {
  const TdProblem p = desk_problem();
  const StepSchedule s(0.5, 0.5);
  const Vector theta0 = Vector::Zero(p.dim());
  BootstrapOptions options;
  options.b_count = state.range(0);
  std::uint64_t id = 0;
  for (auto _ : state) {
    RngStream rng(5, id);
    options.weight_seed = id++;
    benchmark::DoNotOptimize(run_bootstrap(p, s, 1024, theta0, rng, options).boot_averages.data());
  }
  state.SetItemsProcessed(state.iterations() * 2048 * (state.range(0) + 1));
}
BENCHMARK(BM_RunBootstrap)->Arg(20)->Arg(200);

void BM_Lyapunov(benchmark::State& state) {
  RngStream rng(11, 0);
  const Matrix a = random_hurwitz_matrix(state.range(0), rng);
  const Matrix p = 2.0 * Matrix::Identity(state.range(0), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(a, p).data());
}
BENCHMARK(BM_Lyapunov)->Arg(5)->Arg(10)->Arg(20);

void BM_KsTwoSample(benchmark::State& state) {
  RngStream rng(13, 0);
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  const EmpiricalSample sa(a), sb(b);
  for (auto _ : state) benchmark::DoNotOptimize(ks_two_sample(sa, sb));
}
BENCHMARK(BM_KsTwoSample)->Arg(20000)->Arg(200000);

}  // namespace

BENCHMARK_MAIN();
