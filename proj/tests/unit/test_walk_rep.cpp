#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "colonist/colony_sim.hpp"
#include "colonist/replicas.hpp"
#include "colonist/stats.hpp"
#include "colonist/walk_rep.hpp"
#include "oracles.hpp"

namespace colonist {
namespace {

ConcreteModel binary_half() {
  return fixed_model(OffspringLaw::custom({0.5, 0.0, 0.5}), BinomialThinning{0.5});
}

ConcreteModel sterile(std::uint64_t a = 1) {
  return fixed_model(OffspringLaw::custom({1.0}), BinomialThinning{0.5}, a);
}

TEST(PassagePair, Examples) {
  RandomSource rng(1);
  const PassagePair z = passage_pair(sterile(), rng);
  EXPECT_EQ(z.tau, 1u);
  EXPECT_EQ(z.migrants, 0u);
  const auto out = fixed_model(OffspringLaw::custom({0.5, 0.0, 0.5}), BinomialThinning{1.0});
  for (int i = 0; i < 1000; ++i) {
    const PassagePair p = passage_pair(out, rng);
    ASSERT_EQ(p.tau, 1u);
    ASSERT_LE(p.migrants, 2u);
  }
}

TEST(PassagePair, SingleStepFrequency) {
  RandomSource rng(2);
  const int n = 100'000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += passage_pair(binary_half(), rng).tau == 1;
  const double p = oracle::binary_half_single_colony();
  EXPECT_NEAR(static_cast<double>(ones) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(AtomsViaWalk, Examples) {
  RandomSource rng(3);
  const AtomSequence s = atoms_via_walk(sterile(3), 3, rng);
  EXPECT_EQ(s.atoms, (std::vector<std::uint64_t>{1, 1, 1}));
  EXPECT_EQ(s.stopping_index, 3u);

  const auto homebody = fixed_model(OffspringLaw::geometric(), BinomialThinning{0.0});
  for (int i = 0; i < 200; ++i) {
    const AtomSequence h = atoms_via_walk(homebody, 1, rng);
    ASSERT_EQ(h.atoms.size(), 1u);
    ASSERT_EQ(h.stopping_index, 1u);
    ASSERT_EQ(h.final_migrants, 0u);
  }
}

TEST(AtomsViaWalk, StoppingIdentity) {
  RandomSource rng(4);
  const auto m = fixed_model(OffspringLaw::geometric(), BinomialThinning{0.3}, 2);
  for (int i = 0; i < 5000; ++i) {
    const AtomSequence s = atoms_via_walk(m, 2, rng);
    ASSERT_EQ(s.atoms.size(), s.stopping_index);
    ASSERT_EQ(static_cast<std::int64_t>(s.stopping_index) -
                  static_cast<std::int64_t>(s.final_migrants),
              2);
  }
}

// Colony count and total size of the walk partition against direct
// simulation, by chi-square on a joint histogram.
TEST(AtomsViaWalk, PartitionLawMatchesDirectSimulation) {
  // Subcritical, so the colony count has finite mean and the budget is never in play.
  const auto m = fixed_model(OffspringLaw::custom({0.4, 0.4, 0.2}), BinomialThinning{0.5});
  RandomSource rw(5);
  RandomSource rd(6);
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<double, double>> cells;
  auto key = [](std::uint64_t colonies, std::uint64_t total) {
    return std::make_pair(std::min<std::uint64_t>(colonies, 6), std::min<std::uint64_t>(total, 12));
  };
  for (int i = 0; i < 50'000; ++i) {
    const AtomSequence s = atoms_via_walk(m, 1, rw);
    std::uint64_t total = 0;
    for (auto x : s.atoms) total += x;
    cells[key(s.atoms.size(), total)].first += 1;
    const ColonyPartition p = simulate_partition(m, 1, rd);
    cells[key(p.colony_count, p.total_population)].second += 1;
  }
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [k, v] : cells) {
    a.push_back(v.first);
    b.push_back(v.second);
  }
  EXPECT_GT(chi_square_two_sample(a, b).p_value, 0.01);
}

TEST(PassageProcess, Examples) {
  RandomSource rng(7);
  auto m = sterile();
  m.alpha = 400;
  const RescaledPassage r = passage_process_sample(m, 1.0, 20, rng);
  EXPECT_DOUBLE_EQ(r.time, 20.0 / 400.0);
  EXPECT_EQ(r.migrants, 0.0);
}

TEST(PassageProcess, FullMigrationSumsOffspring) {
  RandomSource rng(8);
  // mean-one law: P(0) = 0.5, P(2) = 0.5
  auto m = fixed_model(OffspringLaw::custom({0.5, 0.0, 0.5}), BinomialThinning{1.0});
  m.alpha = 10;
  const RescaledPassage r = passage_process_sample(m, 2.0, 5, rng);
  EXPECT_DOUBLE_EQ(r.time, 10.0 / 10.0);
  // S^m / n is a sum of 10 draws from {0, 2}, divided by 5.
  EXPECT_EQ(std::fmod(r.migrants * 5.0, 2.0), 0.0);
  EXPECT_LE(r.migrants, 4.0);
}

TEST(PassageProcess, MigrantMassBoundedByOne) {
  ModelFamily f;
  f.c = 1.0;
  const ConcreteModel m = model_at(f, 200);
  const PassageSource src(m);
  const auto y = run_replicas<double>(ReplicaPlan{3, 9, 4000, 1}, [&](RandomSource& rng, std::size_t) {
    return passage_process_sample(src, m, 1.0, 200, rng).migrants;
  });
  const MeanEstimate e = mean_with_stderr(y);
  EXPECT_LE(e.mean, 1.0 + 3.0 * e.std_error);
}

TEST(PassageProcess, IncrementsUncorrelated) {
  ModelFamily f;
  f.c = 1.0;
  const ConcreteModel m = model_at(f, 20);
  const PassageSource src(m);
  RandomSource rng(10);
  const std::size_t n = 100'000;
  std::vector<double> tau(n);
  std::vector<double> mig(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PassagePair p = src(rng);
    tau[i] = std::log(static_cast<double>(p.tau));
    mig[i] = static_cast<double>(p.migrants);
  }
  EXPECT_LT(std::abs(lag1_autocorrelation(tau)), 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_LT(std::abs(lag1_autocorrelation(mig)), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(GeometricThinningPassage, AgreesWithGenericWalk) {
  for (double p : {0.5, 0.05, 0.002}) {
    const auto m = fixed_model(OffspringLaw::geometric(), BinomialThinning{p});
    const PassageSource closed(m);
    const PassageSource generic(m, {}, false);
    ASSERT_TRUE(closed.closed_form());
    ASSERT_FALSE(generic.closed_form());
    RandomSource r1(11);
    RandomSource r2(12);
    std::vector<double> a;
    std::vector<double> b;
    for (int i = 0; i < 40'000; ++i) {
      a.push_back(std::log(static_cast<double>(closed(r1).tau)));
      b.push_back(std::log(static_cast<double>(generic(r2).tau)));
    }
    EXPECT_GT(ks_two_sample(a, b).p_value, 0.001) << p;
  }
}

TEST(SymmetricWalk, HalfExcursionTailInversion) {
  // u_{2n} = binom(2n, n) / 4^n.
  EXPECT_DOUBLE_EQ(central_binomial_ratio(0), 1.0);
  EXPECT_DOUBLE_EQ(central_binomial_ratio(1), 0.5);
  EXPECT_DOUBLE_EQ(central_binomial_ratio(2), 0.375);
  EXPECT_EQ(symmetric_half_excursions(0.6), 0u);
  EXPECT_EQ(symmetric_half_excursions(0.5), 1u);
  EXPECT_EQ(symmetric_half_excursions(0.4), 1u);
  EXPECT_EQ(symmetric_half_excursions(0.375), 2u);
  const double big = central_binomial_ratio(1'000'000);
  const double n = 1e6;
  EXPECT_NEAR(big, (1.0 - 1.0 / (8 * n) + 1.0 / (128 * n * n)) / std::sqrt(std::numbers::pi * n),
              1e-16);
}

TEST(SymmetricWalk, ForestTotalPopulationLaw) {
  // A single root with no children has probability 1/2.
  RandomSource rng(13);
  int ones = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) ones += *geometric_forest_total_population(1, rng) == 1;
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

}  // namespace
}  // namespace colonist
