#include "colonist/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace colonist {

namespace {

using nlohmann::json;

struct Location {
  std::size_t line = 0;
  std::size_t column = 0;
};

Location locate_offset(std::string_view text, std::size_t offset) {
  Location loc{1, 1};
  offset = std::min(offset, text.size());
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

// nlohmann::json keeps no source positions, so semantic errors point at the
// first occurrence of the offending key.
Location locate_key(std::string_view text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  const auto pos = text.find(quoted);
  if (pos == std::string_view::npos) return {};
  return locate_offset(text, pos);
}

class Reader {
 public:
  Reader(std::string_view text, std::string source, json root)
      : text_(text), source_(std::move(source)), root_(std::move(root)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const Location loc = locate_key(text_, key);
    throw ConfigError(source_, loc.line, loc.column, message);
  }

  const json* find(const std::string& key) const {
    const auto it = root_.find(key);
    return it == root_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) const {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(key, "'" + key + "' must be a number");
    return v->get<double>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned()) {
      fail(key, "'" + key + "' must be a nonnegative integer");
    }
    return v->get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(key, "'" + key + "' must be a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const json& v, const std::string& key) const {
    if (!v.is_array()) fail(key, "'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "'" + key + "' must contain only numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json& root() const { return root_; }

 private:
  std::string_view text_;
  std::string source_;
  json root_;
};

TestFunction parse_test_function(const Reader& r, const json& v) {
  if (!v.is_object()) r.fail("test_functions", "each test function must be an object");
  try {
    if (v.contains("window")) {
      const auto w = r.numbers(v["window"], "window");
      if (w.size() != 2) r.fail("window", "'window' needs exactly two numbers [lo, hi]");
      double value = 1.0;
      if (v.contains("value")) {
        if (!v["value"].is_number()) r.fail("value", "'value' must be a number");
        value = v["value"].get<double>();
      }
      return TestFunction::window(w[0], w[1], value);
    }
    if (v.contains("breakpoints")) {
      if (!v.contains("values")) r.fail("breakpoints", "'breakpoints' needs matching 'values'");
      return TestFunction(r.numbers(v["breakpoints"], "breakpoints"),
                          r.numbers(v["values"], "values"));
    }
    if (v.empty()) return TestFunction::zero();
  } catch (const ConfigError&) {
    throw;
  } catch (const UsageError& e) {
    r.fail("test_functions", e.what());
  }
  r.fail("test_functions", "test function needs 'window' or 'breakpoints'");
}

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, std::size_t column,
                         const std::string& message)
    : UsageError(line > 0 ? source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                                ": " + message
                          : source + ": " + message),
      line_(line),
      column_(column) {}

ModelFamily ExperimentConfig::family() const {
  ModelFamily f;
  switch (law) {
    case LawName::Geometric:
      f.law = OffspringLaw::geometric();
      break;
    case LawName::Stable:
      f.law = OffspringLaw::stable_pgf(beta);
      break;
    case LawName::Custom:
      f.law = OffspringLaw::custom(probabilities);
      break;
  }
  f.rule = rule;
  f.c = c;
  f.a = a;
  return f;
}

LevyMeasure2D ExperimentConfig::limit_measure() const {
  const OffspringLaw l = family().law;
  switch (rule) {
    case RuleKind::Thinning:
      return NeutralMutation{l.beta(), l.b(), c};
    case RuleKind::AllOrNothing:
      return OneTypeSibling{l.beta(), l.b()};
    case RuleKind::CutOff:
      break;
  }
  throw UsageError("the cut-off rule has no closed-form limit measure");
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    const Location loc = locate_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (const auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError(source, loc.line, loc.column, msg);
  }
  if (!root.is_object()) throw ConfigError(source, 1, 1, "config must be a JSON object");
  const Reader r(text, source, root);

  static const std::vector<std::string> known{
      "law",     "beta", "probabilities", "rule",   "c",              "a",     "n_list",
      "replicas", "seed", "eps",           "lambda", "test_functions", "output"};
  for (const auto& [key, value] : root.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      r.fail(key, "unknown key '" + key + "'");
    }
  }

  ExperimentConfig cfg;
  const std::string law = r.string("law", "geometric");
  if (law == "geometric") {
    cfg.law = LawName::Geometric;
  } else if (law == "stable") {
    cfg.law = LawName::Stable;
  } else if (law == "custom") {
    cfg.law = LawName::Custom;
  } else {
    r.fail("law", "'law' must be one of geometric, stable, custom");
  }
  cfg.beta = r.number("beta", cfg.law == LawName::Stable ? 1.5 : 2.0);
  if (const json* p = r.find("probabilities")) cfg.probabilities = r.numbers(*p, "probabilities");
  if (cfg.law == LawName::Custom && cfg.probabilities.empty()) {
    r.fail("law", "custom law needs 'probabilities'");
  }

  const std::string rule = r.string("rule", "thinning");
  if (rule == "thinning") {
    cfg.rule = RuleKind::Thinning;
  } else if (rule == "all_or_nothing") {
    cfg.rule = RuleKind::AllOrNothing;
  } else if (rule == "cutoff") {
    cfg.rule = RuleKind::CutOff;
  } else {
    r.fail("rule", "'rule' must be one of thinning, all_or_nothing, cutoff");
  }
  cfg.c = r.number("c", cfg.c);
  if (!(cfg.c >= 0.0)) r.fail("c", "'c' must be nonnegative");
  cfg.a = r.number("a", cfg.a);
  if (!(cfg.a > 0.0)) r.fail("a", "'a' must be positive");

  if (const json* v = r.find("n_list")) {
    if (!v->is_array() || v->empty()) r.fail("n_list", "'n_list' must be a nonempty array");
    cfg.n_list.clear();
    for (const auto& e : *v) {
      if (!e.is_number_unsigned() || e.get<std::uint64_t>() < 1) {
        r.fail("n_list", "'n_list' entries must be positive integers");
      }
      cfg.n_list.push_back(e.get<std::uint64_t>());
    }
    if (!std::is_sorted(cfg.n_list.begin(), cfg.n_list.end())) {
      r.fail("n_list", "'n_list' must be sorted ascending");
    }
  }
  cfg.replicas = r.unsigned_integer("replicas", cfg.replicas);
  if (cfg.replicas < 2) r.fail("replicas", "'replicas' must be at least 2");
  cfg.seed = r.unsigned_integer("seed", cfg.seed);
  cfg.eps = r.number("eps", cfg.eps);
  if (!(cfg.eps >= 0.0)) r.fail("eps", "'eps' must be nonnegative");
  cfg.lambda = r.number("lambda", cfg.lambda);
  if (!(cfg.lambda >= 0.0)) r.fail("lambda", "'lambda' must be nonnegative");

  if (const json* v = r.find("test_functions")) {
    if (!v->is_array()) r.fail("test_functions", "'test_functions' must be an array");
    for (const auto& e : *v) cfg.test_functions.push_back(parse_test_function(r, e));
  }
  if (const json* v = r.find("output")) {
    if (!v->is_object()) r.fail("output", "'output' must be an object");
    for (const auto& [key, value] : v->items()) {
      if (!value.is_string()) r.fail(key, "output paths must be strings");
      if (key == "csv") {
        cfg.csv_path = value.get<std::string>();
      } else if (key == "jsonl") {
        cfg.jsonl_path = value.get<std::string>();
      } else {
        r.fail(key, "unknown output key '" + key + "'");
      }
    }
  }

  try {
    (void)cfg.family();
  } catch (const UsageError& e) {
    r.fail(cfg.law == LawName::Custom ? "probabilities" : "beta", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, 0, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* env = std::getenv("COLONIST_SEED");
  if (!env || !*env) return fallback;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || env[0] == '-') {
    throw UsageError("COLONIST_SEED must be a decimal 64-bit integer");
  }
  return v;
}

}  // namespace colonist
