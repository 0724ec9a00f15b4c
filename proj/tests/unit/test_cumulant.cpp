#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "colonist/colony_sim.hpp"
#include "colonist/cumulant.hpp"
#include "colonist/error.hpp"
#include "colonist/replicas.hpp"
#include "oracles.hpp"

namespace colonist {
namespace {

const TestFunction kAtOne = TestFunction::window(0.5, 1.5, std::log(2.0));

TEST(SolveKEmpirical, ZeroFunctionGivesZero) {
  std::vector<PassagePair> s(1000, PassagePair{3, 0});
  s[10] = {1, 2};
  EXPECT_EQ(solve_K_empirical(s, TestFunction::zero()).value, 0.0);
}

TEST(SolveKEmpirical, NoMigrantsGivesTheta) {
  const std::vector<PassagePair> s(1000, PassagePair{1, 0});
  const auto r = solve_K_empirical(s, TestFunction::window(0.5, 1.5, 0.9));
  EXPECT_NEAR(r.value, 0.9, 1e-12);
  EXPECT_LE(r.lo, r.value);
  EXPECT_GE(r.hi, r.value);
}

TEST(SolveKEmpirical, UnitMigrantEverywhereIsDegenerate) {
  const std::vector<PassagePair> s(1000, PassagePair{1, 1});
  EXPECT_THROW(solve_K_empirical(s, kAtOne), DegenerateInput);
}

TEST(SolveKEmpirical, ScaleRescalesColonySizes) {
  const std::vector<PassagePair> s(1000, PassagePair{100, 0});
  EXPECT_NEAR(solve_K_empirical(s, kAtOne, 100.0).value, std::log(2.0), 1e-12);
}

TEST(SolveKEmpirical, ExactSamplesReproduceGeneratingFunctionRoot) {
  const auto m = fixed_model(OffspringLaw::custom({0.5, 0.0, 0.5}), BinomialThinning{0.5});
  const auto pairs = run_replicas<PassagePair>(ReplicaPlan{5, 6, 100'000, 1},
                                               [&](RandomSource& rng, std::size_t) {
                                                 const auto o = simulate_sterilized(m, rng);
                                                 return PassagePair{o.colony_size, o.migrants};
                                               });
  const auto r = solve_K_empirical(pairs, kAtOne);
  const double k = -std::log(oracle::binary_half_laplace_ln2());
  EXPECT_GT(r.stderr_propagated, 0.0);
  EXPECT_NEAR(r.value, k, 3.0 * r.stderr_propagated);
  EXPECT_NEAR(k, 1.01409249510790, 1e-12);
}

TEST(SolveKappa, ZeroFunction) {
  EXPECT_EQ(solve_kappa(NeutralMutation{2.0, 1.0, 1.0}, TestFunction::zero()).value, 0.0);
}

TEST(SolveKappa, UnitAtom) {
  const auto r = solve_kappa(AtomicMeasure{{{1.0, 1.0, 1.0}}}, kAtOne);
  EXPECT_NEAR(r.value, oracle::kappa_unit_atom(std::log(2.0)), 1e-10);
  EXPECT_NEAR(r.value, 0.768039047013466, 1e-10);
}

TEST(SolveKappa, MassConditionEnforced) {
  EXPECT_THROW(solve_kappa(AtomicMeasure{{{1.0, 2.0, 1.0}}}, kAtOne), PreconditionError);
}

TEST(SolveKappa, AgreesWithAxesComposition) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 10; ++i) {
    const Measure1D first = Measure1D::tempered_stable(u(gen), 0.2 + 0.6 * u(gen), u(gen));
    const Measure1D second = Measure1D::atoms({{0.5 + u(gen), 0.4 * u(gen)}, {2.0 * u(gen), 0.1}});
    const TestFunction f({0.3, 1.0, 2.5}, {u(gen), 2.0 * u(gen)});
    const double direct = solve_kappa(Axes{first, second}, f).value;
    const double composed = kappa_axes(first, second, f);
    EXPECT_NEAR(direct, composed, 1e-8 * composed) << i;
  }
}

TEST(SolveKappa, MonotoneInTestFunction) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const LevyMeasure2D lambda = NeutralMutation{2.0, 1.0, 1.0};
  for (int i = 0; i < 8; ++i) {
    const TestFunction f({0.25, 0.5, 1.0, 2.0, 4.0}, {u(gen), u(gen), u(gen), u(gen)});
    const TestFunction g = f + TestFunction::window(0.25 + u(gen), 3.0 + u(gen), u(gen));
    EXPECT_LE(solve_kappa(lambda, f).value, solve_kappa(lambda, g).value + 1e-12);
  }
}

TEST(SolveKappa, ResidualWithinTolerance) {
  const auto r = solve_kappa(NeutralMutation{2.0, 1.0, 1.0}, TestFunction::window(1, 2, 1));
  EXPECT_LE(std::abs(r.residual), 1e-9);
  EXPECT_LE(r.lo, r.value);
  EXPECT_GE(r.hi, r.value);
}

TEST(KappaAxes, Examples) {
  const Measure1D unit = Measure1D::atoms({{1.0, 1.0}});
  EXPECT_EQ(kappa_axes(unit, unit, TestFunction::zero()), 0.0);
  // No second axis: phi is the identity.
  EXPECT_NEAR(kappa_axes(unit, Measure1D{}, kAtOne), 0.5, 1e-12);
  EXPECT_NEAR(kappa_axes(unit, unit, kAtOne), oracle::phi_unit_axes(0.5), 1e-10);
  EXPECT_NEAR(kappa_axes(unit, unit, kAtOne), 1.19829043731566, 1e-10);
}

TEST(InvertPsi, Examples) {
  EXPECT_NEAR(invert_psi(StablePlusDrift{1.0, 2.0, 0.0}, 4.0, 0.0), 2.0, 1e-12);
  EXPECT_NEAR(invert_psi(StablePlusDrift{1.0, 2.0, 1.0}, 2.0, 0.0), 1.0, 1e-12);
  EXPECT_EQ(invert_psi(StablePlusDrift{1.0, 2.0, 1.0}, 0.0, 0.0), 0.0);
  EXPECT_EQ(invert_psi(OneTypeExponent{1.0, 1.5}, 0.0, 0.0), 0.0);
}

TEST(InvertPsi, RoundTrip) {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LaplaceExponent> exps{StablePlusDrift{1.0, 2.0, 1.0}, StablePlusDrift{0.7, 1.4, 0.3},
                                    OneTypeExponent{1.0, 2.0}, OneTypeExponent{0.5, 1.6}};
  for (const auto& psi : exps) {
    for (int i = 0; i < 200; ++i) {
      const double q = 20.0 * u(gen);
      const double r = 5.0 * u(gen);
      const double z = invert_psi(psi, q, r);
      EXPECT_LE(std::abs(evaluate_psi(psi, z, r) - q), 1e-10 * (1.0 + q));
    }
  }
}

TEST(LaplaceExponent, SignConditions) {
  const std::vector<double> grid{0.0, 0.1, 0.5, 1.0, 2.0, 10.0};
  EXPECT_TRUE(exponent_sign_conditions(StablePlusDrift{1.0, 2.0, 1.0}, grid));
  EXPECT_TRUE(exponent_sign_conditions(OneTypeExponent{1.0, 1.5}, grid));
  const auto cut = cutoff_exponent(1.5, 1.0, {0.0, 0.5, 1.0, 2.0}, {0.0, 0.5, 1.0, 2.0});
  EXPECT_TRUE(exponent_sign_conditions(cut, std::vector<double>{0.0, 0.5, 1.0, 2.0}));
}

TEST(PhiNeutral, Examples) {
  EXPECT_NEAR(phi_neutral(1.0, 2.0, 1.0, 2.0), 1.0, 1e-12);
  EXPECT_NEAR(phi_neutral(2.0, 1.5, 0.0, 3.0), std::pow(1.5, 1.0 / 1.5), 1e-12);
  EXPECT_EQ(phi_neutral(1.0, 2.0, 1.0, 0.0), 0.0);
}

TEST(PhiNeutral, QuadraticFormulaAtBetaTwo) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double b = u(gen);
    const double c = u(gen);
    const double q = u(gen);
    const double exact = 2.0 * q / (c + std::sqrt(c * c + 4.0 * b * q));
    EXPECT_NEAR(phi_neutral(b, 2.0, c, q), exact, 1e-12 * exact);
  }
}

TEST(CumulantResult, JsonFields) {
  CumulantResult r;
  r.value = 0.5;
  r.iterations = 3;
  EXPECT_EQ(r.to_json(), R"({"value":0.5,"residual":0.0,"iterations":3,"stderr":0.0})");
}

}  // namespace
}  // namespace colonist
