// Microbenchmarks for the subsampling kernels and the fit pipeline.
// Run with --benchmark_filter=... to pick a subset.

#include <benchmark/benchmark.h>

#include "robreg/irls.hpp"
#include "robreg/linalg.hpp"
#include "robreg/model.hpp"
#include "robreg/rng.hpp"
#include "robreg/sfit.hpp"
#include "robreg/subsample.hpp"

namespace {

robreg::Matrix random_design(int n, int p, std::uint64_t seed) {
  robreg::RngStream rng(seed, 0);
  robreg::Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) x(i, j) = rng.next_normal();
  }
  return x;
}

robreg::Vector random_response(const robreg::Matrix& x, std::uint64_t seed) {
  robreg::RngStream rng(seed, 1);
  robreg::Vector y(x.rows());
  for (int i = 0; i < x.rows(); ++i) {
    y[i] = x(i, x.cols() - 1) + rng.next_normal();
  }
  return y;
}

// one singleton level among ten, the hard case for rejection sampling
robreg::Design rare_level_design() {
  robreg::GenSpec spec;
  spec.n = 50;
  spec.factor_frequencies = {{1, 6, 6, 6, 6, 6, 6, 6, 5, 2}};
  spec.noise_sd = 1.0;
  spec.seed = 11;
  const auto df = robreg::generate(spec);
  return robreg::build_design(df, robreg::implied_model(spec));
}

void BM_PluDecompose(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  robreg::RngStream rng(1, 2);
  robreg::Matrix a(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = rng.next_normal();
  }
  const double tol = robreg::default_sing_tol(p, a.max_abs());
  robreg::PluFactors f;
  int failing = -1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(robreg::try_plu_decompose(a, tol, f, failing));
  }
  state.SetComplexityN(p);
}
BENCHMARK(BM_PluDecompose)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_NonsingularContinuous(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = random_design(n, 10, 3);
  const auto y = random_response(x, 3);
  const double tol = robreg::default_sing_tol(10, x.max_abs());
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        robreg::nonsingular_subsample(x, y, robreg::RngStream(7, stream++), tol));
  }
}
BENCHMARK(BM_NonsingularContinuous)->Arg(100)->Arg(1000);

void BM_RejectionContinuous(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = random_design(n, 10, 3);
  const auto y = random_response(x, 3);
  const double tol = robreg::default_sing_tol(10, x.max_abs());
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(robreg::rejection_subsample(
        x, y, robreg::RngStream(7, stream++), tol, 1));
  }
}
BENCHMARK(BM_RejectionContinuous)->Arg(100)->Arg(1000);

// cost of obtaining one usable candidate on the rare-level design
void BM_NonsingularRareLevel(benchmark::State& state) {
  const auto d = rare_level_design();
  const double tol = robreg::default_sing_tol(d.x.cols(), 1.0);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        robreg::nonsingular_subsample(d.x, d.y, robreg::RngStream(7, stream++), tol));
  }
}
BENCHMARK(BM_NonsingularRareLevel);

void BM_RejectionRareLevel(benchmark::State& state) {
  const auto d = rare_level_design();
  const double tol = robreg::default_sing_tol(d.x.cols(), 1.0);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(robreg::rejection_subsample(
        d.x, d.y, robreg::RngStream(7, stream++), tol, 100000));
  }
}
BENCHMARK(BM_RejectionRareLevel);

void BM_Refine(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = random_design(n, 5, 9);
  const auto y = random_response(x, 9);
  robreg::IrlsConfig cfg;
  cfg.kappa = 0.45;
  const robreg::Vector beta0(5, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(robreg::refine(x, y, beta0, cfg));
  }
}
BENCHMARK(BM_Refine)->Arg(100)->Arg(1000);

void BM_FitAnovaExhaustive(benchmark::State& state) {
  robreg::GenSpec spec;
  spec.n = 9;
  spec.factor_frequencies = {{3, 3, 3}};
  spec.noise_sd = 1.0;
  const auto df = robreg::generate(spec);
  const auto d = robreg::build_design(df, robreg::implied_model(spec));
  robreg::FitConfig cfg;
  cfg.method = robreg::Method::exhaustive;
  for (auto _ : state) {
    benchmark::DoNotOptimize(robreg::fit(d.x, d.y, cfg));
  }
}
BENCHMARK(BM_FitAnovaExhaustive);

}  // namespace

BENCHMARK_MAIN();
