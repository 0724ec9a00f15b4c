#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "colonist/error.hpp"
#include "colonist/offspring.hpp"
#include "colonist/random.hpp"
#include "colonist/replicas.hpp"
#include "colonist/test_function.hpp"

namespace colonist {

struct SimulationLimits {
  /// Maximum number of children drawn (individual births) per run.
  std::uint64_t max_births = 1'000'000'000;
};

/// Partition of the whole population into colonies, with the conservation
/// counters recorded during the run.
struct ColonyPartition {
  std::vector<std::uint64_t> colony_sizes;  // sorted ascending
  std::uint64_t total_population = 0;       // zeta = sum of sizes
  std::uint64_t colony_count = 0;           // gamma = number of colonies
  std::uint64_t ancestors = 0;
  std::uint64_t total_children = 0;  // sum of xi over all individuals
  std::uint64_t total_migrants = 0;  // sum of xi^m over all individuals
};

/// Ancestral colony when migrants are sterilized.
struct SterilizedOutcome {
  std::uint64_t colony_size = 1;  // C
  std::uint64_t migrants = 0;     // M
};

struct ColonyRunSummary {
  std::uint64_t births = 0;
  std::uint64_t colonies = 0;
  std::uint64_t total_population = 0;
  std::uint64_t total_children = 0;
  std::uint64_t total_migrants = 0;
  bool completed = false;  // false when the visitor stopped the run
};

namespace detail {

inline void charge_births(std::uint64_t& births, std::uint64_t add,
                          const SimulationLimits& limits, std::uint64_t colonies) {
  births += add;
  if (births > limits.max_births) {
    throw BudgetExceeded("colony simulation exceeded its birth budget", births,
                         colonies);
  }
}

}  // namespace detail

/// Grows one colony from a single founder: homebody children stay and are
/// grown in turn; migrant children are only counted.
inline SterilizedOutcome grow_colony(const ConcreteModel& model, RandomSource& rng,
                                     const SimulationLimits& limits,
                                     std::uint64_t& births, std::uint64_t colonies_done) {
  SterilizedOutcome out;
  std::uint64_t pending = 1;
  while (pending > 0) {
    --pending;
    const Split s = model.draw(rng);
    detail::charge_births(births, s.homebody + s.migrant, limits, colonies_done);
    out.colony_size += s.homebody;
    pending += s.homebody;
    out.migrants += s.migrant;
  }
  return out;
}

/// Direct simulation of the branching process with emigration from `a`
/// ancestors in distinct sites. Colonies are processed from a FIFO queue;
/// every migrant child enqueues one new colony. `visit(size, migrants)` is
/// called for each completed colony and may return false to stop early.
template <class Visitor>
ColonyRunSummary grow_partition(const ConcreteModel& model, std::uint64_t a,
                                RandomSource& rng, const SimulationLimits& limits,
                                Visitor&& visit) {
  if (a < 1) throw UsageError("need at least one ancestor");
  ColonyRunSummary sum;
  std::uint64_t queued = a;
  while (queued > 0) {
    --queued;
    const SterilizedOutcome c = grow_colony(model, rng, limits, sum.births, sum.colonies);
    ++sum.colonies;
    sum.total_population += c.colony_size;
    sum.total_children += c.colony_size - 1 + c.migrants;
    sum.total_migrants += c.migrants;
    queued += c.migrants;
    if (!visit(c.colony_size, c.migrants)) return sum;
  }
  sum.completed = true;
  return sum;
}

ColonyPartition simulate_partition(const ConcreteModel& model, std::uint64_t a,
                                   RandomSource& rng,
                                   const SimulationLimits& limits = {});

SterilizedOutcome simulate_sterilized(const ConcreteModel& model, RandomSource& rng,
                                      const SimulationLimits& limits = {});

/// Atom source for estimate_laplace: colony sizes divided by `scale`.
inline auto direct_partition_source(const ConcreteModel& model, std::uint64_t a,
                                    double scale, SimulationLimits limits = {}) {
  return [&model, a, scale, limits](RandomSource& rng, auto&& visit) {
    grow_partition(model, a, rng, limits, [&](std::uint64_t size, std::uint64_t) {
      return visit(static_cast<double>(size) / scale);
    });
  };
}

/// Monte Carlo estimate of E_a exp(-<P, f(./scale)>) by direct simulation.
LaplaceEstimate laplace_functional_estimate(const ConcreteModel& model,
                                            std::uint64_t a, const TestFunction& f,
                                            double scale, const ReplicaPlan& plan,
                                            const SimulationLimits& limits = {});

/// Several test functions from the same replicas.
std::vector<LaplaceEstimate> laplace_functional_estimates(
    const ConcreteModel& model, std::uint64_t a, std::span<const TestFunction> fs,
    double scale, const ReplicaPlan& plan, const SimulationLimits& limits = {});

}  // namespace colonist
