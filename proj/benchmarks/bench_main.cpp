#include <benchmark/benchmark.h>

#include "colonist/colony_sim.hpp"
#include "colonist/cumulant.hpp"
#include "colonist/limit_sampler.hpp"
#include "colonist/stable.hpp"
#include "colonist/walk_rep.hpp"

namespace colonist {
namespace {

void BM_PassagePair(benchmark::State& state, bool closed) {
  ModelFamily fam;
  fam.c = 1.0;
  const ConcreteModel m = model_at(fam, static_cast<std::uint64_t>(state.range(0)));
  const PassageSource src(m, {}, closed);
  RandomSource rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(src(rng));
}
BENCHMARK_CAPTURE(BM_PassagePair, closed_form, true)->Arg(100)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(BM_PassagePair, generic_walk, false)->Arg(100)->Arg(1000);

void BM_SimulatePartition(benchmark::State& state) {
  const auto m = fixed_model(OffspringLaw::geometric(), BinomialThinning{0.1});
  SimulationLimits lim;
  lim.max_births = 100'000;
  RandomSource rng(2);
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(simulate_partition(m, 1, rng, lim));
    } catch (const BudgetExceeded&) {
    }
  }
}
BENCHMARK(BM_SimulatePartition);

void BM_DrawMark(benchmark::State& state) {
  const LimitMeasureSampler s(NeutralMutation{2.0, 1.0, 1.0}, 1e-6);
  RandomSource rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(s.draw_mark(rng));
}
BENCHMARK(BM_DrawMark);

void BM_SolveKappa(benchmark::State& state) {
  const LevyMeasure2D lambda = NeutralMutation{1.5, 1.0, 1.0};
  const TestFunction f({0.25, 1.0, 4.0}, {0.4, 1.2});
  for (auto _ : state) benchmark::DoNotOptimize(solve_kappa(lambda, f));
}
BENCHMARK(BM_SolveKappa);

void BM_StableDensity(benchmark::State& state) {
  const StableParams p{1.5, 1.0};
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stable_density(p, x));
    x = x < 5.0 ? x + 0.37 : 0.1;
  }
}
BENCHMARK(BM_StableDensity);

void BM_StableDensityTable(benchmark::State& state) {
  const StableDensityTable t(StableParams{1.5, 1.0});
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(t(x));
    x = x < 5.0 ? x + 0.37 : 0.1;
  }
}
BENCHMARK(BM_StableDensityTable);

}  // namespace
}  // namespace colonist

BENCHMARK_MAIN();
