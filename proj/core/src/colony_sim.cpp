#include "colonist/colony_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace colonist {

ColonyPartition simulate_partition(const ConcreteModel& model, std::uint64_t a,
                                   RandomSource& rng, const SimulationLimits& limits) {
  ColonyPartition p;
  p.ancestors = a;
  const ColonyRunSummary sum =
      grow_partition(model, a, rng, limits, [&](std::uint64_t size, std::uint64_t) {
        p.colony_sizes.push_back(size);
        return true;
      });
  std::sort(p.colony_sizes.begin(), p.colony_sizes.end());
  p.total_population = sum.total_population;
  p.colony_count = sum.colonies;
  p.total_children = sum.total_children;
  p.total_migrants = sum.total_migrants;
  return p;
}

SterilizedOutcome simulate_sterilized(const ConcreteModel& model, RandomSource& rng,
                                      const SimulationLimits& limits) {
  std::uint64_t births = 0;
  return grow_colony(model, rng, limits, births, 0);
}

std::vector<LaplaceEstimate> laplace_functional_estimates(
    const ConcreteModel& model, std::uint64_t a, std::span<const TestFunction> fs,
    double scale, const ReplicaPlan& plan, const SimulationLimits& limits) {
  return estimate_laplace(direct_partition_source(model, a, scale, limits), fs, plan);
}

LaplaceEstimate laplace_functional_estimate(const ConcreteModel& model,
                                            std::uint64_t a, const TestFunction& f,
                                            double scale, const ReplicaPlan& plan,
                                            const SimulationLimits& limits) {
  return laplace_functional_estimates(model, a, std::span<const TestFunction>(&f, 1),
                                      scale, plan, limits)
      .front();
}

MeanEstimate mean_with_stderr(std::span<const double> values) {
  MeanEstimate m;
  m.count = values.size();
  if (values.empty()) return m;
  // Welford
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  m.mean = mean;
  if (k > 1) {
    const double var = m2 / static_cast<double>(k - 1);
    m.std_error = std::sqrt(var / static_cast<double>(k));
  }
  return m;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("COLONIST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace colonist
