#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "colonist/config.hpp"
#include "colonist/harness.hpp"
#include "colonist/report.hpp"
#include "oracles.hpp"

namespace colonist {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("colonist_test_" + name)).string();
}

std::string write_file(const std::string& name, const std::string& text) {
  const std::string path = temp_path(name);
  std::ofstream(path) << text;
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "colonist");
  std::ostringstream o;
  std::ostringstream e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

TEST(Config, Defaults) {
  const ExperimentConfig c = parse_config("{}", "mem");
  EXPECT_EQ(c.law, LawName::Geometric);
  EXPECT_EQ(c.rule, RuleKind::Thinning);
  EXPECT_EQ(c.n_list, (std::vector<std::uint64_t>{50, 200, 800}));
  EXPECT_TRUE(c.has_closed_limit());
  EXPECT_TRUE(std::holds_alternative<NeutralMutation>(c.limit_measure()));
}

TEST(Config, FullDocument) {
  const ExperimentConfig c = parse_config(R"({
    "law": "stable", "beta": 1.5, "rule": "all_or_nothing", "a": 2, "c": 0.5,
    "n_list": [10, 20], "replicas": 1000, "seed": 7, "eps": 1e-5, "lambda": 0.25,
    "test_functions": [{"window": [1, 2], "value": 0.5},
                       {"breakpoints": [0.5, 1, 2], "values": [1, 2]}, {}],
    "output": {"csv": "x.csv", "jsonl": "x.jsonl"}
  })", "mem");
  EXPECT_EQ(c.law, LawName::Stable);
  EXPECT_EQ(c.beta, 1.5);
  EXPECT_EQ(c.rule, RuleKind::AllOrNothing);
  EXPECT_EQ(c.n_list, (std::vector<std::uint64_t>{10, 20}));
  EXPECT_EQ(c.seed, 7u);
  ASSERT_EQ(c.test_functions.size(), 3u);
  EXPECT_EQ(c.test_functions[0](1.5), 0.5);
  EXPECT_EQ(c.test_functions[1](1.5), 2.0);
  EXPECT_TRUE(c.test_functions[2].is_zero());
  EXPECT_EQ(c.csv_path, "x.csv");
  EXPECT_TRUE(std::holds_alternative<OneTypeSibling>(c.limit_measure()));
  EXPECT_EQ(c.family().alpha(4), 12u);
}

TEST(Config, DiagnosticsCarryLineAndColumn) {
  try {
    parse_config("{\n  \"law\": \"geometric\",\n  \"n_list\": [3, 2]\n}", "cfg.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 3u);
    EXPECT_NE(std::string(e.what()).find("cfg.json:3:3"), std::string::npos);
  }
  try {
    parse_config("{\n  \"law\": \"geometric\",\n  \"c\": ,\n}", "cfg.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_config(R"({"colour": 1})", "m"), ConfigError);
  EXPECT_THROW(parse_config(R"({"law": "poisson"})", "m"), ConfigError);
  EXPECT_THROW(parse_config(R"({"law": "custom"})", "m"), ConfigError);
  EXPECT_THROW(parse_config(R"({"law": "custom", "probabilities": [0.2, 0.9]})", "m"), ConfigError);
  EXPECT_THROW(parse_config(R"({"replicas": 1})", "m"), ConfigError);
  EXPECT_THROW(parse_config(R"({"test_functions": [{"window": [0, 1]}]})", "m"), ConfigError);
  EXPECT_THROW(parse_config(R"({"rule": "cutoff"})", "m").limit_measure(), UsageError);
}

TEST(Config, SeedFromEnvironment) {
  ::setenv("COLONIST_SEED", "12345", 1);
  EXPECT_EQ(seed_from_env(1), 12345u);
  ::setenv("COLONIST_SEED", "-4", 1);
  EXPECT_THROW(seed_from_env(1), UsageError);
  ::unsetenv("COLONIST_SEED");
  EXPECT_EQ(seed_from_env(1), 1u);
}

TEST(Report, CsvQuoting) {
  std::ostringstream os;
  CsvWriter w(os, {"name", "value"});
  w.row({"plain", "1"});
  w.row({"a,b", "say \"hi\""});
  w.row({"line\nbreak", ""});
  EXPECT_EQ(os.str(),
            "name,value\r\nplain,1\r\n\"a,b\",\"say \"\"hi\"\"\"\r\n\"line\nbreak\",\r\n");
  EXPECT_THROW(w.row({"only one"}), UsageError);
}

TEST(Report, NumbersRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e-300), "1e-300");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(std::uint64_t{18446744073709551615ULL}), "18446744073709551615");
}

TEST(Harness, GapsShrink) {
  std::vector<ConvergenceRow> rows(3);
  rows[0].gap = 0.1;
  rows[0].std_error = 0.01;
  rows[1].gap = -0.05;
  rows[1].std_error = 0.01;
  rows[2].gap = 0.055;
  rows[2].std_error = 0.01;
  EXPECT_TRUE(gaps_shrink(rows));
  rows[2].gap = 0.08;
  EXPECT_FALSE(gaps_shrink(rows));
  EXPECT_TRUE(gaps_shrink(rows, 3.0));
}

TEST(Harness, PassageScalingZeroFunctionAndNoMigration) {
  ExperimentConfig cfg = parse_config(R"({"n_list": [5, 10], "replicas": 200, "c": 0})", "m");
  HarnessOptions opts;
  const ConvergenceReport rep = run_corollary1(cfg, TestFunction::zero(), 0.0, opts);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.estimate, 0.0);
    EXPECT_EQ(row.target, 0.0);
  }
  for (const auto& r : rep.results) EXPECT_TRUE(r.pass) << r.summary_line();
}

TEST(Harness, PartitionLimitZeroFunctionIsOne) {
  ExperimentConfig cfg = parse_config(R"({"n_list": [5, 10], "replicas": 100,
                                          "test_functions": [{}]})", "m");
  const auto reps = run_theorem2(cfg, HarnessOptions{});
  ASSERT_EQ(reps.size(), 1u);
  for (const auto& row : reps[0].rows) EXPECT_EQ(row.estimate, 1.0);
  EXPECT_EQ(reps[0].target, 1.0);
}

TEST(Harness, PartitionLimitDoublingAncestorsDoublesCumulant) {
  const auto base = parse_config(R"({"n_list": [40], "replicas": 20000,
      "test_functions": [{"window": [0.25, 4], "value": 1}]})", "m");
  auto twice = base;
  twice.a = 2.0;
  const auto r1 = run_theorem2(base, HarnessOptions{})[0].rows[0];
  const auto r2 = run_theorem2(twice, HarnessOptions{})[0].rows[0];
  const double k1 = -std::log(r1.estimate);
  const double k2 = -std::log(r2.estimate);
  const double se = std::hypot(2.0 * r1.std_error / r1.estimate, r2.std_error / r2.estimate);
  EXPECT_NEAR(k2, 2.0 * k1, 3.0 * se);
}

TEST(Harness, EquivalenceSuiteTrivialModel) {
  EquivalenceCase c{"sterile", fixed_model(OffspringLaw::custom({1.0}), BinomialThinning{0.5}), 1.0};
  const std::vector<TestFunction> fs{TestFunction::window(0.5, 1.5, 1.0)};
  const auto results = run_equivalence_suite(std::span(&c, 1), fs, 500, HarnessOptions{});
  for (const auto& r : results) {
    EXPECT_TRUE(r.pass) << r.summary_line();
    EXPECT_EQ(r.estimate, r.target) << r.name;
  }
}

TEST(Harness, TotalPopulationMedianOracle) {
  // Median of the first-passage law: a^2 / (4 z^2) with erfc(z) = 1/2.
  const double z = oracle::bisect([](double x) { return 0.5 - std::erfc(x); }, 0.0, 2.0);
  EXPECT_NEAR(1.0 / (4.0 * z * z), 1.09905466915887, 1e-12);
  EXPECT_NEAR(oracle::first_passage_cdf(1.0, 1.09905466915887), 0.5, 1e-12);
  // Doubling a scales the law by four.
  EXPECT_NEAR(oracle::first_passage_cdf(2.0, 4 * 1.09905466915887), 0.5, 1e-12);
  const auto mass = integrate([](double t) { return oracle::first_passage_density(1.0, t); }, 1e-6,
                              1.09905466915887);
  EXPECT_NEAR(mass.value, 0.5, 1e-8);
}

TEST(Harness, TotalPopulationKsPasses) {
  ExperimentConfig cfg = parse_config(R"({"n_list": [400], "replicas": 4000})", "m");
  const StatTestResult r = run_total_population_check(cfg, 400, HarnessOptions{});
  EXPECT_TRUE(r.pass) << r.summary_line();
}

TEST(Cli, MissingConfigIsUsageError) {
  EXPECT_EQ(run_cli({}), 2);
  EXPECT_EQ(run_cli({"validate"}), 2);
  EXPECT_EQ(run_cli({"validate", temp_path("does_not_exist.json")}), 2);
  EXPECT_EQ(run_cli({"frobnicate", "x.json"}), 2);
}

TEST(Cli, MalformedConfigReportsLine) {
  const auto path = write_file("bad.json", "{\n  \"law\": \"geometric\"\n  \"c\": 1\n}");
  std::string err;
  EXPECT_EQ(run_cli({"cumulant", path}, nullptr, &err), 2);
  EXPECT_NE(err.find("bad.json:3:"), std::string::npos) << err;
}

TEST(Cli, CumulantOfZeroFunctionIsZero) {
  const auto path = write_file("zero.json", R"({"test_functions": [{}]})");
  std::string out;
  EXPECT_EQ(run_cli({"cumulant", path}, &out), 0);
  EXPECT_NE(out.find("\"value\":0.0"), std::string::npos) << out;
}

TEST(Cli, OutputsAreByteIdenticalAcrossThreadCounts) {
  const auto cfg = write_file("small.json", R"({"n_list": [6], "replicas": 300})");
  const auto csv1 = temp_path("sim1.csv");
  const auto csv2 = temp_path("sim2.csv");
  const auto js1 = temp_path("sim1.jsonl");
  const auto js2 = temp_path("sim2.jsonl");
  ASSERT_EQ(run_cli({"simulate", cfg, "--threads", "1", "--csv", csv1, "--jsonl", js1}), 0);
  ASSERT_EQ(run_cli({"simulate", cfg, "--threads", "3", "--csv", csv2, "--jsonl", js2}), 0);
  EXPECT_EQ(read_file(csv1), read_file(csv2));
  EXPECT_EQ(read_file(js1), read_file(js2));
  EXPECT_EQ(read_file(csv1).rfind("replica_id,colony_size\r\n", 0), 0u);
  EXPECT_NE(read_file(js1).find("\"zeta\":"), std::string::npos);

  std::string w1;
  std::string w2;
  ASSERT_EQ(run_cli({"walk", cfg, "--threads", "1"}, &w1), 0);
  ASSERT_EQ(run_cli({"walk", cfg, "--threads", "2"}, &w2), 0);
  EXPECT_EQ(w1, w2);
  EXPECT_EQ(w1.rfind("replica_id,tau1,Sm_tau1\r\n", 0), 0u);

  std::string l1;
  ASSERT_EQ(run_cli({"limit", cfg, "--replicas", "20"}, &l1), 0);
  EXPECT_EQ(std::count(l1.begin(), l1.end(), '\n'), 20);
  EXPECT_EQ(l1.rfind("{\"y\":1.0,\"sigma_y\":", 0), 0u);
}

TEST(Cli, SeedOverrideChangesOutput) {
  const auto cfg = write_file("seeded.json", R"({"n_list": [6], "replicas": 50})");
  std::string a;
  std::string b;
  ::setenv("COLONIST_SEED", "1", 1);
  ASSERT_EQ(run_cli({"walk", cfg}, &a), 0);
  ::setenv("COLONIST_SEED", "2", 1);
  ASSERT_EQ(run_cli({"walk", cfg}, &b), 0);
  ::unsetenv("COLONIST_SEED");
  EXPECT_NE(a, b);
}

}  // namespace
}  // namespace colonist
