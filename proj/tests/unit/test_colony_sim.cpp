#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "colonist/colony_sim.hpp"
#include "colonist/error.hpp"
#include "colonist/replicas.hpp"
#include "oracles.hpp"

namespace colonist {
namespace {

ConcreteModel binary_half() {
  return fixed_model(OffspringLaw::custom({0.5, 0.0, 0.5}), BinomialThinning{0.5});
}

ConcreteModel sterile() { return fixed_model(OffspringLaw::custom({1.0}), BinomialThinning{0.5}); }

TEST(SimulatePartition, NoBirthsGivesSingletons) {
  RandomSource rng(1);
  const ColonyPartition p = simulate_partition(sterile(), 7, rng);
  EXPECT_EQ(p.colony_sizes, std::vector<std::uint64_t>(7, 1));
  EXPECT_EQ(p.total_population, 7u);
  EXPECT_EQ(p.colony_count, 7u);
}

TEST(SimulatePartition, FullMigrationKeepsAncestralColonySingle) {
  RandomSource rng(2);
  const auto m = fixed_model(OffspringLaw::custom({0.5, 0.0, 0.5}), BinomialThinning{1.0});
  for (int i = 0; i < 1000; ++i) {
    const ColonyPartition p = simulate_partition(m, 1, rng);
    for (auto s : p.colony_sizes) ASSERT_EQ(s, 1u);
  }
}

TEST(SimulatePartition, ConservationAcrossConfigs) {
  RandomSource rng(3);
  const std::vector<ConcreteModel> models{
      binary_half(), fixed_model(OffspringLaw::geometric(), BinomialThinning{0.2}),
      fixed_model(OffspringLaw::geometric(), CutOff{2}),
      fixed_model(OffspringLaw::geometric(), AllOrNothing{3.0}, 3)};
  for (const auto& m : models) {
    for (int i = 0; i < 5000; ++i) {
      const ColonyPartition p = simulate_partition(m, m.ancestors, rng);
      const std::uint64_t sum =
          std::accumulate(p.colony_sizes.begin(), p.colony_sizes.end(), std::uint64_t{0});
      ASSERT_EQ(sum, p.total_population);
      ASSERT_EQ(p.colony_sizes.size(), p.colony_count);
      ASSERT_EQ(p.total_population, p.ancestors + p.total_children);
      ASSERT_EQ(p.colony_count, p.ancestors + p.total_migrants);
      ASSERT_GE(p.colony_count, p.ancestors);
      ASSERT_TRUE(std::is_sorted(p.colony_sizes.begin(), p.colony_sizes.end()));
    }
  }
}

TEST(SimulatePartition, BudgetGuard) {
  RandomSource rng(4);
  SimulationLimits tiny;
  tiny.max_births = 10;
  const auto m = fixed_model(OffspringLaw::geometric(), BinomialThinning{0.01}, 50);
  EXPECT_THROW(
      {
        for (int i = 0; i < 100; ++i) simulate_partition(m, 50, rng, tiny);
      },
      BudgetExceeded);
}

TEST(SimulatePartition, RejectsZeroAncestors) {
  RandomSource rng(5);
  EXPECT_THROW(simulate_partition(binary_half(), 0, rng), UsageError);
}

TEST(SimulateSterilized, Examples) {
  RandomSource rng(6);
  const SterilizedOutcome o = simulate_sterilized(sterile(), rng);
  EXPECT_EQ(o.colony_size, 1u);
  EXPECT_EQ(o.migrants, 0u);

  const auto all_out = fixed_model(OffspringLaw::geometric(), BinomialThinning{1.0});
  double mean_m = 0.0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const SterilizedOutcome s = simulate_sterilized(all_out, rng);
    ASSERT_EQ(s.colony_size, 1u);
    mean_m += static_cast<double>(s.migrants);
  }
  EXPECT_NEAR(mean_m / n, 1.0, 3.0 * std::sqrt(2.0 / n));
}

TEST(SimulateSterilized, SingleColonyFrequency) {
  RandomSource rng(7);
  const int n = 100'000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += simulate_sterilized(binary_half(), rng).colony_size == 1;
  const double p = oracle::binary_half_single_colony();
  EXPECT_NEAR(static_cast<double>(ones) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(LaplaceFunctional, ZeroFunctionIsExactlyOne) {
  const auto est = laplace_functional_estimate(binary_half(), 3, TestFunction::zero(), 1.0,
                                               ReplicaPlan{1, 2, 100, 1});
  EXPECT_EQ(est.estimate, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(LaplaceFunctional, SingleAtomIsExact) {
  const double theta = 0.7;
  const auto est = laplace_functional_estimate(sterile(), 1, TestFunction::window(0.5, 1.5, theta),
                                               1.0, ReplicaPlan{1, 2, 50, 1});
  EXPECT_DOUBLE_EQ(est.estimate, std::exp(-theta));
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(LaplaceFunctional, MatchesGeneratingFunctionOracle) {
  // f = ln 2 on colonies of size one.
  const auto f = TestFunction::window(0.5, 1.5, std::log(2.0));
  const auto est =
      laplace_functional_estimate(binary_half(), 1, f, 1.0, ReplicaPlan{1, 3, 100'000, 1});
  EXPECT_NEAR(est.estimate, oracle::binary_half_laplace_ln2(), 3.0 * est.std_error);
  EXPECT_NEAR(oracle::binary_half_laplace_ln2(), 0.362731461086626, 1e-12);
}

TEST(LaplaceFunctional, BranchingPropertyInAncestors) {
  const auto f = TestFunction::window(1, 3, 0.8);
  std::vector<double> k;
  std::vector<double> se;
  for (std::uint64_t a : {1, 2, 4}) {
    const auto e = laplace_functional_estimate(binary_half(), a, f, 1.0,
                                               ReplicaPlan{8, a, 60'000, 1});
    k.push_back(-std::log(e.estimate) / static_cast<double>(a));
    se.push_back(e.std_error / e.estimate / static_cast<double>(a));
  }
  for (std::size_t i = 1; i < k.size(); ++i) {
    EXPECT_NEAR(k[i], k[0], 3.0 * std::hypot(se[i], se[0]));
  }
}

TEST(LaplaceFunctional, DeterministicAcrossThreadCounts) {
  const auto m = fixed_model(OffspringLaw::geometric(), BinomialThinning{0.2}, 2);
  const std::vector<TestFunction> fs{TestFunction::window(1, 4, 0.5),
                                     TestFunction::window(2, 9, 1.0)};
  const auto one = laplace_functional_estimates(m, 2, fs, 1.0, ReplicaPlan{42, 1, 5000, 1});
  const auto four = laplace_functional_estimates(m, 2, fs, 1.0, ReplicaPlan{42, 1, 5000, 4});
  for (std::size_t i = 0; i < fs.size(); ++i) {
    EXPECT_EQ(one[i].estimate, four[i].estimate);
    EXPECT_EQ(one[i].std_error, four[i].std_error);
  }
}

}  // namespace
}  // namespace colonist
