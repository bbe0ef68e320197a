#include <benchmark/benchmark.h>

#include "fdslrm/estimators.hpp"
#include "fdslrm/mme.hpp"
#include "fdslrm/projection.hpp"
#include "fdslrm/simulate.hpp"

namespace {

using namespace fdslrm;

GaussianSampler make_sampler(long n, long l) {
  SimulationConfig cfg;
  cfg.spec.n = n;
  cfg.spec.trend = {TermSpec::constant(), TermSpec::cosine_harmonic(1, n),
                    TermSpec::sine_harmonic(1, n)};
  for (long j = 0; j < l; ++j) {
    const long h = 2 + j / 2;
    cfg.spec.random.push_back(j % 2 == 0 ? TermSpec::cosine_harmonic(h, n)
                                         : TermSpec::sine_harmonic(h, n));
  }
  cfg.beta = VectorXd::Constant(3, 1.0);
  VectorXd nu = VectorXd::Constant(l + 1, 1.0);
  // Half the components are truly zero so the scan has to leave the all-ones pattern.
  for (long j = 1; j <= l; j += 2) nu(j) = 0.0;
  cfg.nu_true = VarianceComponents(nu);
  cfg.seed = 7;
  return GaussianSampler(cfg);
}

void BM_NnMdoolseOverN(benchmark::State& state) {
  const auto sampler = make_sampler(state.range(0), 4);
  const VectorXd x = sampler.draw(0).x;
  for (auto _ : state) {
    const auto cache = build_projection(sampler.design(), x);
    auto sol = estimate_nn_doolse(gram_system(cache, sampler.design(), DoolseVariant::mdoolse));
    benchmark::DoNotOptimize(sol.nu_hat);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NnMdoolseOverN)->RangeMultiplier(10)->Range(1000, 1000000)->Complexity(benchmark::oN);

void BM_KktBodyOverL(benchmark::State& state) {
  const long l = state.range(0);
  const auto sampler = make_sampler(64, l);
  const auto cache = build_projection(sampler.design(), sampler.draw(0).x);
  const auto gram = gram_system(cache, sampler.design(), DoolseVariant::mdoolse);
  for (auto _ : state) {
    // The full scan, so time reflects every candidate system.
    auto feasible = kkt_feasible_patterns(gram);
    benchmark::DoNotOptimize(feasible);
  }
}
BENCHMARK(BM_KktBodyOverL)->DenseRange(1, 8);

void BM_NaturalEstimator(benchmark::State& state) {
  const auto sampler = make_sampler(state.range(0), 4);
  const VectorXd x = sampler.draw(0).x;
  for (auto _ : state) {
    auto nu = estimate_ne(build_projection(sampler.design(), x), sampler.design());
    benchmark::DoNotOptimize(nu);
  }
}
BENCHMARK(BM_NaturalEstimator)->RangeMultiplier(10)->Range(1000, 100000);

void BM_SolveMme(benchmark::State& state) {
  const auto sampler = make_sampler(state.range(0), 4);
  const VectorXd x = sampler.draw(0).x;
  const auto nu = sampler.config().nu_true;
  for (auto _ : state) {
    auto r = solve_mme(sampler.design(), x, nu);
    benchmark::DoNotOptimize(r.y_hat);
  }
}
BENCHMARK(BM_SolveMme)->RangeMultiplier(10)->Range(1000, 100000);

}  // namespace
BENCHMARK_MAIN();
