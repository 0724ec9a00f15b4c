#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colonist/error.hpp"
#include "colonist/levy_measure.hpp"
#include "colonist/offspring.hpp"
#include "colonist/test_function.hpp"

namespace colonist {

/// Malformed or invalid configuration. `line` and `column` are 1-based and
/// zero when no location is known.
class ConfigError : public UsageError {
 public:
  ConfigError(const std::string& source, std::size_t line, std::size_t column,
              const std::string& message);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class LawName { Geometric, Stable, Custom };

/// An experiment as read from a JSON config file.
///
///   {
///     "law": "geometric" | "stable" | "custom",
///     "beta": 1.5,                      // stable only
///     "probabilities": [0.5, 0, 0.5],   // custom only
///     "rule": "thinning" | "all_or_nothing" | "cutoff",
///     "c": 1.0, "a": 1.0,
///     "n_list": [50, 200, 800],
///     "replicas": 4000,
///     "seed": 20100801,
///     "eps": 1e-6,
///     "lambda": 0.5,
///     "test_functions": [ {"window": [1, 2], "value": 1.0},
///                         {"breakpoints": [0.5, 1, 2], "values": [1, 2]} ],
///     "output": { "csv": "out.csv", "jsonl": "out.jsonl" }
///   }
struct ExperimentConfig {
  LawName law = LawName::Geometric;
  double beta = 2.0;
  std::vector<double> probabilities;
  RuleKind rule = RuleKind::Thinning;
  double c = 1.0;
  double a = 1.0;
  std::vector<std::uint64_t> n_list{50, 200, 800};
  std::size_t replicas = 4000;
  std::uint64_t seed = 20100801;
  double eps = 1e-6;
  double lambda = 0.5;
  std::vector<TestFunction> test_functions;
  std::string csv_path;
  std::string jsonl_path;

  ModelFamily family() const;
  /// Limit Levy measure of the family; cut-off has none in closed form.
  LevyMeasure2D limit_measure() const;
  bool has_closed_limit() const noexcept { return rule != RuleKind::CutOff; }
};

ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Master seed from COLONIST_SEED if set (decimal 64-bit), else `fallback`.
std::uint64_t seed_from_env(std::uint64_t fallback);

}  // namespace colonist
