#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "colonist/error.hpp"
#include "colonist/numerics.hpp"
#include "colonist/random.hpp"
#include "colonist/replicas.hpp"
#include "colonist/stats.hpp"
#include "colonist/test_function.hpp"

namespace colonist {
namespace {

TEST(TestFunction, EvaluationAndSupport) {
  const TestFunction f({0.5, 1.0, 3.0}, {2.0, 0.5});
  EXPECT_EQ(f(0.4), 0.0);
  EXPECT_EQ(f(0.5), 2.0);
  EXPECT_EQ(f(0.99), 2.0);
  EXPECT_EQ(f(1.0), 0.5);
  EXPECT_EQ(f(3.0), 0.0);
  EXPECT_EQ(f.max_value(), 2.0);
  EXPECT_EQ(f.support_lo(), 0.5);
  EXPECT_EQ(f.support_hi(), 3.0);
  EXPECT_EQ(f.describe(), "2*1[0.5,1) + 0.5*1[1,3)");
}

TEST(TestFunction, Validation) {
  EXPECT_THROW(TestFunction({0.0, 1.0}, {1.0}), UsageError);
  EXPECT_THROW(TestFunction({1.0, 0.5}, {1.0}), UsageError);
  EXPECT_THROW(TestFunction({1.0, 2.0}, {1.0, 2.0}), UsageError);
  EXPECT_THROW(TestFunction({1.0, 2.0}, {-1.0}), UsageError);
  EXPECT_TRUE(TestFunction::zero().is_zero());
  EXPECT_EQ(TestFunction::zero()(1.0), 0.0);
}

TEST(TestFunction, RescaleAndSum) {
  const TestFunction f = TestFunction::window(1, 2, 0.5);
  const TestFunction g = f.rescaled(100.0);
  EXPECT_EQ(g(150.0), 0.5);
  EXPECT_EQ(g(1.5), 0.0);
  const TestFunction h = f + TestFunction::window(1.5, 3, 1.0);
  EXPECT_EQ(h(1.2), 0.5);
  EXPECT_EQ(h(1.7), 1.5);
  EXPECT_EQ(h(2.5), 1.0);
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  auto a = RandomSource::for_stream(1, 2, 3);
  auto b = RandomSource::for_stream(1, 2, 3);
  auto c = RandomSource::for_stream(1, 2, 4);
  auto d = RandomSource::for_stream(1, 3, 3);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  EXPECT_EQ(experiment_id("alpha"), experiment_id("alpha"));
  EXPECT_NE(experiment_id("alpha"), experiment_id("beta"));
}

TEST(Random, UniformOpenInterval) {
  RandomSource r(5);
  for (int i = 0; i < 100'000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Replicas, OrderedAggregationIndependentOfThreads) {
  auto fn = [](RandomSource& rng, std::size_t r) { return rng.uniform() + static_cast<double>(r); };
  const auto one = run_replicas<double>(ReplicaPlan{9, 1, 1000, 1}, fn);
  const auto many = run_replicas<double>(ReplicaPlan{9, 1, 1000, 3}, fn);
  EXPECT_EQ(one, many);
}

TEST(Replicas, MeanWithStderr) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanEstimate m = mean_with_stderr(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std_error, std::sqrt((1.25 * 4.0 / 3.0) / 4.0), 1e-15);
}

TEST(Numerics, GaussKronrod) {
  const auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  EXPECT_NEAR(r.value, 2.0, 1e-13);
}

TEST(Numerics, EndpointSingularity) {
  const auto r = integrate_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 2.0, 1e-10);
  const auto s = integrate_to_infinity([](double x) { return std::exp(-x) / std::sqrt(x); }, 0.0);
  EXPECT_NEAR(s.value, std::sqrt(std::numbers::pi), 1e-10);
}

TEST(Numerics, BracketedRoot) {
  const auto r = solve_bracketed([](double x) { return x * x - 2.0; },
                                 [](double x) { return 2.0 * x; }, 0.0, 2.0);
  EXPECT_NEAR(r.root, std::sqrt(2.0), 1e-12);
  EXPECT_LE(r.lo, r.root);
  EXPECT_GE(r.hi, r.root);
  const auto b = solve_bracketed([](double x) { return std::exp(x) - 3.0; }, {}, 0.0, 5.0);
  EXPECT_NEAR(b.root, std::log(3.0), 1e-12);
}

TEST(Numerics, UpperBracketSearch) {
  const double hi = find_upper_bracket([](double x) { return x - 1000.0; }, 1.0);
  EXPECT_GT(hi, 1000.0);
  EXPECT_THROW(find_upper_bracket([](double) { return -1.0; }, 1.0, 1e6), DegenerateInput);
}

TEST(Stats, CompareDefinesPass) {
  EXPECT_TRUE(StatTestResult::compare("a", 1.0, 1.2, 0.1, 0.2).pass);
  EXPECT_FALSE(StatTestResult::compare("a", 1.0, 1.3, 0.1, 0.2).pass);
}

TEST(Stats, JsonlKeyOrder) {
  StatTestResult r = StatTestResult::compare("x", 0.5, 0.25, 0.125, 1.0);
  r.runtime_seconds = 2.0;
  EXPECT_EQ(r.to_jsonl(),
            R"({"name":"x","estimate":0.5,"target":0.25,"stderr":0.125,"tolerance":1.0,"pass":true})");
  EXPECT_EQ(r.to_jsonl(true),
            R"({"name":"x","estimate":0.5,"target":0.25,"stderr":0.125,"tolerance":1.0,"pass":true,"runtime":2.0})");
}

TEST(Stats, ChiSquareHomogeneous) {
  const std::vector<double> a{100, 200, 300, 50};
  const std::vector<double> b{210, 390, 610, 95};
  EXPECT_GT(chi_square_two_sample(a, b).p_value, 0.01);
  const std::vector<double> c{300, 100, 100, 50};
  EXPECT_LT(chi_square_two_sample(a, c).p_value, 0.01);
}

TEST(Stats, KolmogorovSurvival) {
  // Tabulated: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 1e-4);
}

TEST(Stats, KsOneSampleUniform) {
  RandomSource r(3);
  std::vector<double> u(20'000);
  for (auto& x : u) x = r.uniform();
  const auto ks = ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_GT(ks.p_value, 0.01);
  std::vector<double> v(20'000);
  for (auto& x : v) x = r.uniform() * r.uniform();
  EXPECT_LT(ks_one_sample(v, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value, 1e-6);
}

TEST(Stats, KsCensoredTail) {
  RandomSource r(4);
  std::vector<double> e(20'000);
  for (auto& x : e) {
    x = r.exponential(1.0);
    if (x > 5.0) x = std::numeric_limits<double>::infinity();
  }
  EXPECT_GT(ks_one_sample(e, [](double x) { return x > 0 ? -std::expm1(-x) : 0.0; }).p_value,
            0.01);
}

TEST(Stats, BonferroniAndAutocorrelation) {
  EXPECT_NEAR(bonferroni_z(0.05, 1), 1.959963984540054, 1e-9);
  EXPECT_GT(bonferroni_z(0.01, 50), bonferroni_z(0.01, 5));
  const std::vector<double> alt{1, -1, 1, -1, 1, -1, 1, -1};
  EXPECT_LT(lag1_autocorrelation(alt), -0.8);
}

}  // namespace
}  // namespace colonist
