#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <memory>
#include <optional>

#include "colonist/colony_sim.hpp"
#include "colonist/config.hpp"
#include "colonist/cumulant.hpp"
#include "colonist/error.hpp"
#include "colonist/harness.hpp"
#include "colonist/limit_sampler.hpp"
#include "colonist/replicas.hpp"
#include "colonist/report.hpp"
#include "colonist/walk_rep.hpp"

namespace colonist::cli {

namespace {

struct Common {
  std::string config;
  std::string csv;
  std::string jsonl;
  unsigned threads = 0;
  std::optional<std::size_t> replicas;
  bool runtime = false;
};

// Either a file or a borrowed stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream* fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("cannot open output file " + path);
      stream_ = file_.get();
    } else {
      stream_ = fallback;
    }
  }
  explicit operator bool() const { return stream_ != nullptr; }
  std::ostream& operator*() const { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

struct Context {
  ExperimentConfig cfg;
  HarnessOptions opts;
  std::string csv_path;
  std::string jsonl_path;
  bool runtime = false;
};

Context load(const Common& c) {
  Context ctx;
  ctx.cfg = load_config(c.config);
  ctx.cfg.seed = seed_from_env(ctx.cfg.seed);
  if (c.replicas) ctx.cfg.replicas = *c.replicas;
  ctx.opts.seed = ctx.cfg.seed;
  ctx.opts.threads = c.threads > 0 ? c.threads : default_thread_count();
  ctx.csv_path = c.csv.empty() ? ctx.cfg.csv_path : c.csv;
  ctx.jsonl_path = c.jsonl.empty() ? ctx.cfg.jsonl_path : c.jsonl;
  ctx.runtime = c.runtime;
  return ctx;
}

ReplicaPlan plan(const Context& ctx, const std::string& experiment) {
  return ReplicaPlan{ctx.opts.seed, experiment_id(experiment), ctx.cfg.replicas,
                     ctx.opts.threads};
}

std::string n_label(std::uint64_t n) { return "n=" + std::to_string(n); }

int report(const std::vector<StatTestResult>& results, const Context& ctx, std::ostream& out,
           std::ostream& err, bool jsonl_primary) {
  Sink sink(ctx.jsonl_path, jsonl_primary ? &out : nullptr);
  bool ok = true;
  for (const auto& r : results) {
    if (sink) JsonlWriter(*sink, ctx.runtime).write(r);
    (jsonl_primary ? err : out) << r.summary_line() << '\n';
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

int cmd_simulate(const Common& c, std::uint64_t n, std::ostream& out, std::ostream& err) {
  const Context ctx = load(c);
  const ModelFamily family = ctx.cfg.family();
  const std::uint64_t nn = n > 0 ? n : ctx.cfg.n_list.front();
  const ConcreteModel model = model_at(family, nn);
  const auto parts = run_replicas<ColonyPartition>(
      plan(ctx, "simulate/" + n_label(nn)), [&](RandomSource& rng, std::size_t) {
        return simulate_partition(model, model.ancestors, rng, ctx.opts.limits);
      });
  Sink csv(ctx.csv_path, &out);
  CsvWriter w(*csv, {"replica_id", "colony_size"});
  for (std::size_t r = 0; r < parts.size(); ++r) {
    for (const auto s : parts[r].colony_sizes) w.row({std::to_string(r), format_number(s)});
  }
  Sink summary(ctx.jsonl_path, nullptr);
  if (summary) {
    for (std::size_t r = 0; r < parts.size(); ++r) {
      *summary << "{\"replica\":" << r << ",\"n\":" << nn
               << ",\"ancestors\":" << parts[r].ancestors
               << ",\"zeta\":" << parts[r].total_population
               << ",\"gamma\":" << parts[r].colony_count << "}\n";
    }
  }
  err << "simulated " << parts.size() << " partitions at n=" << nn << '\n';
  return 0;
}

int cmd_walk(const Common& c, std::uint64_t n, bool atoms, std::ostream& out,
             std::ostream& err) {
  const Context ctx = load(c);
  const std::uint64_t nn = n > 0 ? n : ctx.cfg.n_list.front();
  const ConcreteModel model = model_at(ctx.cfg.family(), nn);
  Sink csv(ctx.csv_path, &out);
  if (atoms) {
    const auto seqs = run_replicas<AtomSequence>(
        plan(ctx, "walk/atoms/" + n_label(nn)), [&](RandomSource& rng, std::size_t) {
          return atoms_via_walk(model, model.ancestors, rng, ctx.opts.limits);
        });
    CsvWriter w(*csv, {"replica_id", "index", "atom"});
    for (std::size_t r = 0; r < seqs.size(); ++r) {
      for (std::size_t j = 0; j < seqs[r].atoms.size(); ++j) {
        w.row({std::to_string(r), std::to_string(j + 1), format_number(seqs[r].atoms[j])});
      }
    }
  } else {
    const PassageSource source(model, ctx.opts.limits);
    const auto pairs = run_replicas<PassagePair>(
        plan(ctx, "walk/passage/" + n_label(nn)),
        [&](RandomSource& rng, std::size_t) { return source(rng); });
    CsvWriter w(*csv, {"replica_id", "tau1", "Sm_tau1"});
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      w.row({std::to_string(r), format_number(pairs[r].tau), format_number(pairs[r].migrants)});
    }
  }
  err << "walked " << ctx.cfg.replicas << " replicas at n=" << nn << '\n';
  return 0;
}

int cmd_cumulant(const Common& c, std::uint64_t n, std::ostream& out) {
  const Context ctx = load(c);
  std::vector<TestFunction> fs = ctx.cfg.test_functions;
  if (fs.empty()) fs.push_back(TestFunction::zero());
  std::vector<PassagePair> pairs;
  std::uint64_t nn = 0;
  double alpha = 1.0;
  // Empirical root from (C, M) draws when asked for, or when no closed
  // limit exists.
  if (n > 0 || !ctx.cfg.has_closed_limit()) {
    nn = n > 0 ? n : ctx.cfg.n_list.back();
    const ConcreteModel model = model_at(ctx.cfg.family(), nn);
    alpha = static_cast<double>(model.alpha);
    const PassageSource source(model, ctx.opts.limits);
    pairs = run_replicas<PassagePair>(plan(ctx, "cumulant/" + n_label(nn)),
                                      [&](RandomSource& rng, std::size_t) { return source(rng); });
  }
  for (const auto& f : fs) {
    CumulantResult k;
    if (nn > 0) {
      // n K_n(f(./alpha)) approximates kappa(f).
      k = solve_K_empirical(pairs, f.rescaled(alpha));
      k.value *= static_cast<double>(nn);
      k.stderr_propagated *= static_cast<double>(nn);
    } else {
      k = solve_kappa(ctx.cfg.limit_measure(), f);
    }
    out << "{\"f\":\"" << f.describe() << "\",\"n\":" << nn << ",\"result\":" << k.to_json()
        << "}\n";
  }
  return 0;
}

int cmd_limit(const Common& c, std::optional<double> y, std::ostream& out, std::ostream& err) {
  const Context ctx = load(c);
  const double level = y.value_or(ctx.cfg.a);
  const LimitMeasureSampler sampler(ctx.cfg.limit_measure(), std::max(ctx.cfg.eps, 1e-12));
  const auto samples = run_replicas<PointMeasureSample>(
      plan(ctx, "limit/y=" + format_number(level)),
      [&](RandomSource& rng, std::size_t) { return sampler.sample(level, rng); });
  Sink sink(ctx.jsonl_path, &out);
  for (const auto& s : samples) *sink << s.to_json() << '\n';
  err << "sampled " << samples.size() << " limit measures at y=" << format_number(level) << '\n';
  return 0;
}

int cmd_converge(const Common& c, std::ostream& out, std::ostream& err) {
  const Context ctx = load(c);
  if (ctx.cfg.test_functions.empty()) throw UsageError("converge needs test_functions");
  std::vector<ConvergenceReport> reps;
  for (std::size_t i = 0; i < ctx.cfg.test_functions.size(); ++i) {
    ConvergenceReport rep = run_corollary1(ctx.cfg, ctx.cfg.test_functions[i], ctx.cfg.lambda,
                                           ctx.opts);
    rep.name += "/f" + std::to_string(i);
    for (auto& r : rep.results) r.name += "/f" + std::to_string(i);
    reps.push_back(std::move(rep));
  }
  for (auto& rep : run_theorem2(ctx.cfg, ctx.opts)) reps.push_back(std::move(rep));

  Sink csv(ctx.csv_path, &out);
  CsvWriter w(*csv, {"experiment", "n", "estimate", "std_error", "target", "gap"});
  std::vector<StatTestResult> results;
  for (const auto& rep : reps) {
    for (const auto& row : rep.rows) {
      w.row({rep.name, format_number(row.n), format_number(row.estimate),
             format_number(row.std_error), format_number(row.target), format_number(row.gap)});
    }
    results.insert(results.end(), rep.results.begin(), rep.results.end());
  }
  return report(results, ctx, out, err, false);
}

int cmd_validate(const Common& c, std::ostream& out, std::ostream& err) {
  const Context ctx = load(c);
  return report(validate(ctx.cfg, ctx.opts), ctx, out, err, true);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Branching populations with rare migration: simulation and limit checks",
               args.empty() ? "colonist" : args.front()};
  app.require_subcommand(1);

  Common common;
  std::uint64_t n = 0;
  bool atoms = false;
  std::optional<double> y;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", common.config, "JSON experiment config")->required();
    sub->add_option("--csv", common.csv, "CSV output path (overrides the config)");
    sub->add_option("--jsonl", common.jsonl, "JSONL output path (overrides the config)");
    sub->add_option("--threads", common.threads, "worker threads (default COLONIST_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--replicas", common.replicas, "override the config replica count")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
    sub->add_flag("--runtime", common.runtime, "include runtimes in JSONL results");
  };

  auto* simulate = app.add_subcommand("simulate", "colony partitions by direct simulation");
  add_common(simulate);
  simulate->add_option("--n", n, "model index (default: first of n_list)");
  auto* walk = app.add_subcommand("walk", "(tau_1, S^m_tau_1) pairs from the skip-free walk");
  add_common(walk);
  walk->add_option("--n", n, "model index (default: first of n_list)");
  walk->add_flag("--atoms", atoms, "write the passage-time atoms up to eta_a instead");
  auto* cumulant = app.add_subcommand("cumulant", "kappa(f) for each configured test function");
  add_common(cumulant);
  cumulant->add_option("--n", n, "solve the empirical equation at this n instead");
  auto* limit = app.add_subcommand("limit", "samples of the limit point measure M_y");
  add_common(limit);
  limit->add_option("--y", y, "level y (default: a)");
  auto* converge = app.add_subcommand("converge", "convergence tables over n_list");
  add_common(converge);
  auto* validate_cmd = app.add_subcommand("validate", "full self-consistency suite");
  add_common(validate_cmd);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*simulate) return cmd_simulate(common, n, out, err);
    if (*walk) return cmd_walk(common, n, atoms, out, err);
    if (*cumulant) return cmd_cumulant(common, n, out);
    if (*limit) return cmd_limit(common, y, out, err);
    if (*converge) return cmd_converge(common, out, err);
    if (*validate_cmd) return cmd_validate(common, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace colonist::cli
