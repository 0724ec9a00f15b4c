#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "colonist/colony_sim.hpp"
#include "colonist/config.hpp"
#include "colonist/cumulant.hpp"
#include "colonist/levy_measure.hpp"
#include "colonist/offspring.hpp"
#include "colonist/stats.hpp"
#include "colonist/test_function.hpp"

namespace colonist {

struct HarnessOptions {
  std::uint64_t seed = 20100801;
  unsigned threads = 1;
  /// Standard errors allowed in mean comparisons.
  double sigma = 3.0;
  /// Level of chi-square and KS tests.
  double significance = 0.01;
  /// Standard errors of slack in the shrinking-gap checks.
  double monotone_slack = 1.0;
  SimulationLimits limits{};
};

/// A small model for the cross-representation tests, with the exact
/// probability of C = 1 when it is known.
struct EquivalenceCase {
  std::string name;
  ConcreteModel model;
  std::optional<double> p_single;
};

/// xi in {0, 2} with thinning 1/2; geometric with p(100); geometric cut off
/// at 3.
std::vector<EquivalenceCase> default_equivalence_cases();

/// Chi-square homogeneity of (C, M) from the colony simulator against
/// (tau_1, S^m_{tau_1}) from the coupled walk.
StatTestResult passage_law_test(const EquivalenceCase& c, std::size_t samples,
                                const HarnessOptions& opts);

/// Frequency of C = 1 against its exact value.
StatTestResult single_colony_test(const EquivalenceCase& c, std::size_t samples,
                                  const HarnessOptions& opts);

/// Laplace functionals of the walk atoms against direct simulation, one
/// result per test function.
std::vector<StatTestResult> representation_test(const EquivalenceCase& c, std::uint64_t a,
                                                std::span<const TestFunction> fs,
                                                std::size_t replicas,
                                                const HarnessOptions& opts);

std::vector<StatTestResult> run_equivalence_suite(std::span<const EquivalenceCase> cases,
                                                  std::span<const TestFunction> fs,
                                                  std::size_t samples,
                                                  const HarnessOptions& opts);

/// exp(-K(f)) from sterilized samples against direct Laplace functionals
/// from one ancestor.
std::vector<StatTestResult> cumulant_root_consistency(const EquivalenceCase& c,
                                               std::span<const TestFunction> fs,
                                               std::size_t samples,
                                               const HarnessOptions& opts);

struct ConvergenceRow {
  std::uint64_t n = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  double gap = 0.0;
  std::size_t saturated = 0;
};

struct ConvergenceReport {
  std::string name;
  std::vector<ConvergenceRow> rows;
  double target = 0.0;
  double target_error = 0.0;
  bool monotone = true;
  std::vector<StatTestResult> results;
};

/// |gap| nonincreasing along the rows up to `slack` combined standard errors.
bool gaps_shrink(std::span<const ConvergenceRow> rows, double slack = 1.0);

/// n E g(tau/alpha(n), S^m/n) with g = 1 - exp(-f(x1) - lambda x2) against
/// the integral of g under the limit Levy measure.
ConvergenceReport run_corollary1(const ExperimentConfig& cfg, const TestFunction& f,
                                 double lambda, const HarnessOptions& opts);

/// E_{a(n)} exp(-<P_n, f(./alpha(n))>) for each n against exp(-a kappa(f)),
/// plus the limit-measure sampler at y = a as a third estimate.
std::vector<ConvergenceReport> run_theorem2(const ExperimentConfig& cfg,
                                            const HarnessOptions& opts);

/// KS test of zeta_n / n^2 at n against the first-passage law
/// P(T_a <= t) = erfc(a / (2 sqrt t)). Geometric law only.
StatTestResult run_total_population_check(const ExperimentConfig& cfg, std::uint64_t n,
                                          const HarnessOptions& opts);

/// Mass condition of the limit measure plus the sampled mean of Y_1.
std::vector<StatTestResult> mass_condition_check(const LevyMeasure2D& lambda, double eps,
                                                 std::size_t replicas,
                                                 const HarnessOptions& opts);

/// Limit-measure Laplace functionals at level y against y kappa(f), one
/// result per function; the tolerance carries the truncation bias bound
/// when `with_bias` is set.
std::vector<StatTestResult> limit_sampler_check(const LevyMeasure2D& lambda, double y,
                                                double eps, std::span<const TestFunction> fs,
                                                std::size_t replicas, bool with_bias,
                                                const HarnessOptions& opts);

/// Everything above for one config, at a Bonferroni-corrected level.
std::vector<StatTestResult> validate(const ExperimentConfig& cfg, HarnessOptions opts);

}  // namespace colonist
