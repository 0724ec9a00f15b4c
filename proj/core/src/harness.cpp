#include "colonist/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "colonist/limit_sampler.hpp"
#include "colonist/walk_rep.hpp"

namespace colonist {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ReplicaPlan plan_for(const HarnessOptions& opts, const std::string& experiment,
                     std::size_t replicas) {
  return ReplicaPlan{opts.seed, experiment_id(experiment), replicas, opts.threads};
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string tag(std::size_t i) { return "f" + std::to_string(i); }

// Joint (C, M) cell: C exact up to 16, then by octave; M capped at 8.
std::pair<std::uint64_t, std::uint64_t> cell_of(const PassagePair& p) {
  std::uint64_t c = p.tau;
  if (c > 16) {
    std::uint64_t octave = 0;
    while ((c >> octave) > 16) ++octave;
    c = 16 + octave;
  }
  return {c, std::min<std::uint64_t>(p.migrants, 8)};
}

std::vector<PassagePair> sterilized_samples(const ConcreteModel& model, std::size_t samples,
                                            const std::string& experiment,
                                            const HarnessOptions& opts) {
  return run_replicas<PassagePair>(
      plan_for(opts, experiment, samples), [&](RandomSource& rng, std::size_t) {
        const SterilizedOutcome o = simulate_sterilized(model, rng, opts.limits);
        return PassagePair{o.colony_size, o.migrants};
      });
}

// Violation of |gap_j| <= |gap_i| + k combined stderr over consecutive rows;
// zero when the gaps shrink.
double monotone_violation(std::span<const ConvergenceRow> rows, double k) {
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double slack = k * std::hypot(rows[i - 1].std_error, rows[i].std_error);
    worst = std::max(worst, std::abs(rows[i].gap) - std::abs(rows[i - 1].gap) - slack);
  }
  return worst;
}

StatTestResult monotone_result(const std::string& name, std::span<const ConvergenceRow> rows,
                               double k) {
  StatTestResult r = StatTestResult::compare(name, monotone_violation(rows, k), 0.0, 0.0, 0.0);
  std::string gaps;
  for (const auto& row : rows) {
    if (!gaps.empty()) gaps += ' ';
    gaps += "n=" + std::to_string(row.n) + ":" + fmt(row.gap);
  }
  r.detail = "slack " + fmt(k) + " se; gaps " + gaps;
  return r;
}

// One-sided check value <= bound + tolerance, written so that
// pass <=> |estimate - target| <= tolerance still holds.
StatTestResult upper_bound_result(const std::string& name, double value, double bound,
                                  double std_error, double tolerance) {
  StatTestResult r =
      StatTestResult::compare(name, value, std::min(value, bound), std_error, tolerance);
  r.detail = "one-sided, bound " + fmt(bound);
  return r;
}

}  // namespace

std::vector<EquivalenceCase> default_equivalence_cases() {
  std::vector<EquivalenceCase> out;
  out.push_back({"binary-thinning-half",
                 fixed_model(OffspringLaw::custom({0.5, 0.0, 0.5}), BinomialThinning{0.5}),
                 5.0 / 8.0});
  ModelFamily geo;
  geo.c = 1.0;
  ConcreteModel thin = model_at(geo, 100);
  thin.alpha = 1;
  thin.ancestors = 1;
  out.push_back({"geometric-thinning-p100", thin, std::nullopt});
  out.push_back(
      {"geometric-cutoff-3", fixed_model(OffspringLaw::geometric(), CutOff{3}), std::nullopt});
  return out;
}

StatTestResult passage_law_test(const EquivalenceCase& c, std::size_t samples,
                                const HarnessOptions& opts) {
  const auto t0 = Clock::now();
  const auto direct = sterilized_samples(c.model, samples, "passage_law/direct/" + c.name, opts);
  const auto walk = run_replicas<PassagePair>(
      plan_for(opts, "passage_law/walk/" + c.name, samples),
      [&](RandomSource& rng, std::size_t) { return passage_pair(c.model, rng, opts.limits); });
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<double, double>> cells;
  for (const auto& p : direct) cells[cell_of(p)].first += 1.0;
  for (const auto& p : walk) cells[cell_of(p)].second += 1.0;
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [key, counts] : cells) {
    a.push_back(counts.first);
    b.push_back(counts.second);
  }
  const ChiSquareResult chi = chi_square_two_sample(a, b, opts.significance);
  StatTestResult r = StatTestResult::compare("passage_law/" + c.name, chi.statistic, 0.0, 0.0,
                                             chi.dof > 0 ? chi.critical_value : 0.0);
  r.detail = "chi2 p=" + fmt(chi.p_value) + " dof=" + std::to_string(chi.dof);
  r.runtime_seconds = seconds_since(t0);
  return r;
}

StatTestResult single_colony_test(const EquivalenceCase& c, std::size_t samples,
                                  const HarnessOptions& opts) {
  if (!c.p_single) throw UsageError("case has no exact P(C = 1)");
  const auto t0 = Clock::now();
  const auto direct = sterilized_samples(c.model, samples, "passage_law/direct/" + c.name, opts);
  double hits = 0.0;
  for (const auto& p : direct) hits += p.tau == 1 ? 1.0 : 0.0;
  const double n = static_cast<double>(direct.size());
  const double est = hits / n;
  const double p = *c.p_single;
  const double se = std::sqrt(p * (1.0 - p) / n);
  StatTestResult r =
      StatTestResult::compare("passage_law/" + c.name + "/C=1", est, p, se, opts.sigma * se);
  r.runtime_seconds = seconds_since(t0);
  return r;
}

std::vector<StatTestResult> representation_test(const EquivalenceCase& c, std::uint64_t a,
                                                std::span<const TestFunction> fs,
                                                std::size_t replicas,
                                                const HarnessOptions& opts) {
  const auto t0 = Clock::now();
  const auto walk = estimate_laplace(coupled_walk_source(c.model, a, 1.0, opts.limits), fs,
                                     plan_for(opts, "walk_atoms/walk/" + c.name, replicas));
  const auto direct = laplace_functional_estimates(
      c.model, a, fs, 1.0, plan_for(opts, "walk_atoms/direct/" + c.name, replicas), opts.limits);
  std::vector<StatTestResult> out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double se = std::hypot(walk[i].std_error, direct[i].std_error);
    const double bias = walk[i].saturation_bias + direct[i].saturation_bias;
    StatTestResult r = StatTestResult::compare("walk_atoms/" + c.name + "/" + tag(i),
                                               walk[i].estimate, direct[i].estimate, se,
                                               opts.sigma * se + bias);
    r.detail = fs[i].describe();
    r.runtime_seconds = seconds_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StatTestResult> run_equivalence_suite(std::span<const EquivalenceCase> cases,
                                                  std::span<const TestFunction> fs,
                                                  std::size_t samples,
                                                  const HarnessOptions& opts) {
  std::vector<StatTestResult> out;
  for (const auto& c : cases) {
    out.push_back(passage_law_test(c, samples, opts));
    if (c.p_single) out.push_back(single_colony_test(c, samples, opts));
    for (auto& r : representation_test(c, c.model.ancestors, fs, samples, opts)) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<StatTestResult> cumulant_root_consistency(const EquivalenceCase& c,
                                               std::span<const TestFunction> fs,
                                               std::size_t samples,
                                               const HarnessOptions& opts) {
  const auto t0 = Clock::now();
  const auto pairs = sterilized_samples(c.model, samples, "cumulant_root/sterilized/" + c.name, opts);
  const auto direct = laplace_functional_estimates(
      c.model, 1, fs, 1.0, plan_for(opts, "cumulant_root/direct/" + c.name, samples), opts.limits);
  std::vector<StatTestResult> out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const CumulantResult k = solve_K_empirical(pairs, fs[i]);
    const double e = std::exp(-k.value);
    const double se_e = e * k.stderr_propagated;
    const double se = std::hypot(se_e, direct[i].std_error);
    StatTestResult r = StatTestResult::compare("cumulant_root/" + c.name + "/" + tag(i), e,
                                               direct[i].estimate, se,
                                               opts.sigma * se + direct[i].saturation_bias);
    r.detail = fs[i].describe() + "; K=" + fmt(k.value);
    r.runtime_seconds = seconds_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

bool gaps_shrink(std::span<const ConvergenceRow> rows, double slack) {
  return monotone_violation(rows, slack) <= 0.0;
}

ConvergenceReport run_corollary1(const ExperimentConfig& cfg, const TestFunction& f,
                                 double lambda, const HarnessOptions& opts) {
  const auto t0 = Clock::now();
  ConvergenceReport rep;
  rep.name = "passage_scaling";
  const LaplaceIntegral li = laplace_integral(cfg.limit_measure(), f, lambda);
  rep.target = li.value;
  rep.target_error = li.error;
  const ModelFamily family = cfg.family();
  for (const std::uint64_t n : cfg.n_list) {
    const ConcreteModel model = model_at(family, n);
    const PassageSource source(model, opts.limits);
    const double alpha = static_cast<double>(model.alpha);
    const double nd = static_cast<double>(n);
    // n E g = E of g summed over the n ancestral colonies of n ancestors.
    const auto g = run_replicas<double>(
        plan_for(opts, "passage_scaling/n=" + std::to_string(n), cfg.replicas),
        [&](RandomSource& rng, std::size_t) {
          double sum = 0.0;
          for (std::uint64_t j = 0; j < n; ++j) {
            const PassagePair p = source(rng);
            const double e = f(static_cast<double>(p.tau) / alpha) +
                             lambda * static_cast<double>(p.migrants) / nd;
            sum += -std::expm1(-e);
          }
          return sum;
        });
    const MeanEstimate m = mean_with_stderr(g);
    ConvergenceRow row;
    row.n = n;
    row.estimate = m.mean;
    row.std_error = m.std_error;
    row.target = rep.target;
    row.gap = row.estimate - row.target;
    rep.rows.push_back(row);
  }
  rep.monotone = gaps_shrink(rep.rows, opts.monotone_slack);
  const ConvergenceRow& last = rep.rows.back();
  StatTestResult gap = StatTestResult::compare("passage_scaling/gap", last.estimate, rep.target,
                                               last.std_error,
                                               opts.sigma * last.std_error + rep.target_error);
  gap.detail = f.describe() + "; lambda=" + fmt(lambda) + "; n=" + std::to_string(last.n);
  gap.runtime_seconds = seconds_since(t0);
  rep.results.push_back(gap);
  StatTestResult mono = monotone_result("passage_scaling/monotone", rep.rows, opts.monotone_slack);
  mono.runtime_seconds = gap.runtime_seconds;
  rep.results.push_back(mono);
  return rep;
}

std::vector<ConvergenceReport> run_theorem2(const ExperimentConfig& cfg,
                                            const HarnessOptions& opts) {
  const auto t0 = Clock::now();
  const std::span<const TestFunction> fs(cfg.test_functions);
  const LevyMeasure2D lambda = cfg.limit_measure();
  const ModelFamily family = cfg.family();

  std::vector<ConvergenceReport> reps(fs.size());
  std::vector<CumulantResult> kappas;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    kappas.push_back(solve_kappa(lambda, fs[i]));
    reps[i].name = "partition_limit/" + tag(i);
    reps[i].target = std::exp(-cfg.a * kappas[i].value);
    reps[i].target_error =
        reps[i].target * cfg.a * (kappas[i].quadrature_error + std::abs(kappas[i].residual));
  }

  std::vector<double> saturation(fs.size(), 0.0);
  for (const std::uint64_t n : cfg.n_list) {
    const ConcreteModel model = model_at(family, n);
    const PassageSource source(model, opts.limits);
    const auto est = estimate_laplace(
        walk_partition_source(source, model.ancestors, static_cast<double>(model.alpha)), fs,
        plan_for(opts, "partition_limit/n=" + std::to_string(n), cfg.replicas));
    for (std::size_t i = 0; i < fs.size(); ++i) {
      ConvergenceRow row;
      row.n = n;
      row.estimate = est[i].estimate;
      row.std_error = est[i].std_error;
      row.target = reps[i].target;
      row.gap = row.estimate - row.target;
      row.saturated = est[i].saturated;
      reps[i].rows.push_back(row);
      saturation[i] = est[i].saturation_bias;
    }
  }

  const LimitMeasureSampler sampler(lambda, std::max(cfg.eps, 1e-12));
  const auto lim = limit_laplace_estimates(sampler, cfg.a, fs,
                                           plan_for(opts, "partition_limit/limit", cfg.replicas));

  for (std::size_t i = 0; i < fs.size(); ++i) {
    ConvergenceReport& rep = reps[i];
    rep.monotone = gaps_shrink(rep.rows, opts.monotone_slack);
    const ConvergenceRow& last = rep.rows.back();
    const double budget = saturation[i] + rep.target_error;
    StatTestResult gap = StatTestResult::compare(rep.name + "/gap", last.estimate, rep.target,
                                                 last.std_error,
                                                 opts.sigma * last.std_error + budget);
    gap.detail = fs[i].describe() + "; n=" + std::to_string(last.n) +
                 "; kappa=" + fmt(kappas[i].value);
    rep.results.push_back(gap);
    rep.results.push_back(monotone_result(rep.name + "/monotone", rep.rows, opts.monotone_slack));

    // Truncation bias acts on the cumulant; map it to the functional.
    const double trunc =
        lim[i].estimate * std::expm1(sampler.bias_bound(cfg.a, fs[i])) + lim[i].saturation_bias;
    StatTestResult ls = StatTestResult::compare(
        rep.name + "/limit_sampler", lim[i].estimate, rep.target, lim[i].std_error,
        opts.sigma * lim[i].std_error + trunc + rep.target_error);
    ls.detail = "eps=" + fmt(sampler.eps());
    rep.results.push_back(ls);

    const double se = std::hypot(last.std_error, lim[i].std_error);
    StatTestResult sl = StatTestResult::compare(rep.name + "/sim_vs_limit", last.estimate,
                                                lim[i].estimate, se,
                                                opts.sigma * se + trunc + saturation[i]);
    sl.detail = "n=" + std::to_string(last.n);
    rep.results.push_back(sl);
    for (auto& r : rep.results) r.runtime_seconds = seconds_since(t0);
  }
  return reps;
}

StatTestResult run_total_population_check(const ExperimentConfig& cfg, std::uint64_t n,
                                          const HarnessOptions& opts) {
  if (cfg.law != LawName::Geometric) {
    throw UsageError("total population check needs the geometric law");
  }
  const auto t0 = Clock::now();
  const ModelFamily family = cfg.family();
  const std::uint64_t a_n = family.ancestors(n);
  const double alpha = static_cast<double>(family.alpha(n));
  const double a = static_cast<double>(a_n) / static_cast<double>(n);
  auto samples = run_replicas<double>(
      plan_for(opts, "total_population/n=" + std::to_string(n), cfg.replicas),
      [&](RandomSource& rng, std::size_t) {
        const auto z = geometric_forest_total_population(a_n, rng);
        return z ? static_cast<double>(*z) / alpha : std::numeric_limits<double>::infinity();
      });
  const KsResult ks = ks_one_sample(
      std::move(samples),
      [a](double t) { return t > 0.0 ? std::erfc(a / (2.0 * std::sqrt(t))) : 0.0; },
      opts.significance);
  StatTestResult r = StatTestResult::compare("total_population/n=" + std::to_string(n),
                                             ks.statistic, 0.0, 0.0, ks.critical_value);
  r.detail = "KS p=" + fmt(ks.p_value) + " a=" + fmt(a);
  r.runtime_seconds = seconds_since(t0);
  return r;
}

std::vector<StatTestResult> mass_condition_check(const LevyMeasure2D& lambda, double eps,
                                                 std::size_t replicas,
                                                 const HarnessOptions& opts) {
  const auto t0 = Clock::now();
  std::vector<StatTestResult> out;
  const MassCheck mc = check_mass_condition(lambda);
  StatTestResult m = upper_bound_result("mass/" + describe(lambda), mc.value, 1.0, 0.0, 1e-9);
  m.runtime_seconds = seconds_since(t0);
  out.push_back(m);

  const LimitMeasureSampler sampler(lambda, eps);
  const auto ys = run_replicas<double>(
      plan_for(opts, "mass/Y1/" + describe(lambda), replicas),
      [&](RandomSource& rng, std::size_t) { return sampler.sample_Y(1.0, rng); });
  const MeanEstimate y = mean_with_stderr(ys);
  StatTestResult e = upper_bound_result("mass/Y1/" + describe(lambda), y.mean, 1.0,
                                        y.std_error, opts.sigma * y.std_error);
  e.runtime_seconds = seconds_since(t0);
  out.push_back(e);
  return out;
}

std::vector<StatTestResult> limit_sampler_check(const LevyMeasure2D& lambda, double y,
                                                double eps, std::span<const TestFunction> fs,
                                                std::size_t replicas, bool with_bias,
                                                const HarnessOptions& opts) {
  const auto t0 = Clock::now();
  const LimitMeasureSampler sampler(lambda, eps);
  const auto est = limit_laplace_estimates(
      sampler, y, fs, plan_for(opts, "limit/" + describe(lambda) + "/y=" + fmt(y), replicas));
  std::vector<StatTestResult> out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const CumulantResult k = solve_kappa(lambda, fs[i]);
    const double c = est[i].cumulant();
    const double se = est[i].cumulant_stderr();
    double tol = opts.sigma * se + y * (k.quadrature_error + std::abs(k.residual)) +
                 est[i].saturation_bias / est[i].estimate;
    if (with_bias) tol += sampler.bias_bound(y, fs[i]);
    StatTestResult r = StatTestResult::compare(
        "limit/" + describe(lambda) + "/y=" + fmt(y) + "/" + tag(i), c, y * k.value, se, tol);
    r.detail = fs[i].describe() + "; eps=" + fmt(eps);
    r.runtime_seconds = seconds_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StatTestResult> validate(const ExperimentConfig& cfg, HarnessOptions opts) {
  // Small-model suites run at unit scale, so they use their own functions.
  const std::vector<TestFunction> unit_fs{TestFunction::window(1, 2, 0.5),
                                          TestFunction::window(1, 4, 1.0),
                                          TestFunction({1, 2, 8}, {0.3, 0.7})};
  const auto cases = default_equivalence_cases();
  const bool closed = cfg.has_closed_limit();
  const bool geometric = cfg.law == LawName::Geometric;
  const std::size_t nf = cfg.test_functions.size();

  std::size_t planned = 0;
  for (const auto& c : cases) planned += 1 + (c.p_single ? 1 : 0) + unit_fs.size();
  planned += unit_fs.size();  // cumulant root
  if (closed) planned += 2 + 2 * nf + 4 * nf;
  if (geometric) planned += 1;
  opts.sigma = bonferroni_z(opts.significance, planned);
  opts.monotone_slack = opts.sigma;
  opts.significance /= static_cast<double>(planned);

  std::vector<StatTestResult> out;
  auto append = [&](std::vector<StatTestResult> rs) {
    for (auto& r : rs) out.push_back(std::move(r));
  };
  append(run_equivalence_suite(cases, unit_fs, cfg.replicas, opts));
  append(cumulant_root_consistency(cases.front(), unit_fs, cfg.replicas, opts));
  if (closed) {
    const LevyMeasure2D lambda = cfg.limit_measure();
    append(mass_condition_check(lambda, std::max(cfg.eps, 1e-12), cfg.replicas, opts));
    for (std::size_t i = 0; i < nf; ++i) {
      ConvergenceReport rep = run_corollary1(cfg, cfg.test_functions[i], cfg.lambda, opts);
      for (auto& r : rep.results) r.name += "/" + tag(i);
      append(std::move(rep.results));
    }
    for (auto& rep : run_theorem2(cfg, opts)) append(std::move(rep.results));
  }
  if (geometric) out.push_back(run_total_population_check(cfg, cfg.n_list.back(), opts));
  return out;
}

}  // namespace colonist
