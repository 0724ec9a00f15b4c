#include "colonist/limit_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "colonist/stable.hpp"

namespace colonist {

std::string PointMeasureSample::to_json() const {
  nlohmann::ordered_json j;
  j["y"] = y;
  j["sigma_y"] = sigma_y;
  j["atoms"] = atoms;
  j["eps"] = eps;
  j["bias_bound"] = bias_bound;
  return j.dump();
}

LimitMeasureSampler::LimitMeasureSampler(LevyMeasure2D lambda, double eps, double kernel_eps)
    : lambda_(std::move(lambda)), eps_(eps), kernel_eps_(kernel_eps) {
  if (!(eps >= 0.0)) throw UsageError("eps must be >= 0");
  const MassCheck mc = check_mass_condition(lambda_);
  if (!mc.pass) throw PreconditionError("mass condition violated by the Levy measure");
  auto need_eps = [&] {
    if (!(eps_ > 0.0)) throw UsageError("infinite-activity measure needs eps > 0");
  };
  if (const auto* nm = std::get_if<NeutralMutation>(&lambda_)) {
    need_eps();
    first_ = neutral_marginal_measure(*nm);
    first_eps_ = eps_;
    rate_ = first_.mass_above(eps_);
    drift_ = nm->c * first_.moment_below(eps_);
  } else if (const auto* ot = std::get_if<OneTypeSibling>(&lambda_)) {
    need_eps();
    if (ot->beta < 2.0 && !(kernel_eps_ > 0.0 && kernel_eps_ < 1.0)) {
      throw UsageError("kernel eps must lie in (0, 1)");
    }
    first_ = one_type_marginal_measure(*ot);
    first_eps_ = eps_;
    rate_ = first_.mass_above(eps_);
    drift_ = ot->b * ot->beta * first_.moment_below(eps_);
  } else if (const auto* ax = std::get_if<Axes>(&lambda_)) {
    first_ = ax->first;
    second_ = ax->second;
    first_eps_ = first_.finite_activity() ? 0.0 : eps_;
    second_eps_ = second_.finite_activity() ? 0.0 : eps_;
    if ((!first_.finite_activity() || !second_.finite_activity())) need_eps();
    const double r1 = first_.is_zero() ? 0.0 : first_.mass_above(first_eps_);
    const double r2 = second_.is_zero() ? 0.0 : second_.mass_above(second_eps_);
    rate_ = r1 + r2;
    first_share_ = rate_ > 0.0 ? r1 / rate_ : 1.0;
    drift_ = second_.moment_below(second_eps_);
  } else if (const auto* dg = std::get_if<Diagonal>(&lambda_)) {
    first_ = dg->marginal;
    first_eps_ = first_.finite_activity() ? 0.0 : eps_;
    if (!first_.finite_activity()) need_eps();
    rate_ = first_.mass_above(first_eps_);
    drift_ = first_.moment_below(first_eps_);
  } else {
    const auto& am = std::get<AtomicMeasure>(lambda_);
    double acc = 0.0;
    for (const auto& a : am.atoms) {
      if (!(a.mass >= 0.0) || !(a.x1 >= 0.0) || !(a.x2 >= 0.0)) {
        throw UsageError("atoms need nonnegative coordinates and mass");
      }
      acc += a.mass;
      atom_cdf_.push_back(acc);
    }
    rate_ = acc;
  }
  if (!(drift_ < 1.0)) throw PreconditionError("compensating drift must be below 1");
}

Mark LimitMeasureSampler::draw_mark(RandomSource& rng) const {
  return std::visit(
      [&](const auto& m) -> Mark {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NeutralMutation>) {
          const double x = first_.sample_above(first_eps_, rng);
          return {x, m.c * x};
        } else if constexpr (std::is_same_v<T, OneTypeSibling>) {
          const double x = first_.sample_above(first_eps_, rng);
          return {x, one_type_kernel_sample(m.beta, m.b, x, kernel_eps_, rng)};
        } else if constexpr (std::is_same_v<T, Axes>) {
          if (rng.uniform() < first_share_) return {first_.sample_above(first_eps_, rng), 0.0};
          return {0.0, second_.sample_above(second_eps_, rng)};
        } else if constexpr (std::is_same_v<T, Diagonal>) {
          const double x = first_.sample_above(first_eps_, rng);
          return {x, x};
        } else {
          const double u = rng.uniform() * atom_cdf_.back();
          auto it = std::upper_bound(atom_cdf_.begin(), atom_cdf_.end(), u);
          if (it == atom_cdf_.end()) --it;
          const auto& a = m.atoms[static_cast<std::size_t>(it - atom_cdf_.begin())];
          return {a.x1, a.x2};
        }
      },
      lambda_);
}

double LimitMeasureSampler::bias_bound(double y, const TestFunction& f) const {
  double hidden = 0.0;
  if (!f.is_zero() && first_eps_ > f.support_lo() && !first_.finite_activity()) {
    hidden = first_.mass_above(f.support_lo()) - first_.mass_above(first_eps_);
  }
  return y * (drift_ + f.max_value() * hidden);
}

std::pair<double, std::size_t> LimitMeasureSampler::run_until(double y, double horizon,
                                                              RandomSource& rng) const {
  if (!(y > 0.0)) throw UsageError("y must be positive");
  const double slope = 1.0 - drift_;
  double t = 0.0;
  double level = 0.0;
  std::size_t count = 0;
  while (true) {
    const double gap =
        rate_ > 0.0 ? rng.exponential(rate_) : std::numeric_limits<double>::infinity();
    if (level + slope * gap >= y) return {t + (y - level) / slope, count};
    t += gap;
    if (t > horizon) return {std::numeric_limits<double>::infinity(), count};
    level += slope * gap;
    const Mark m = draw_mark(rng);
    level -= m.x2;
    if (m.x1 > 0.0) ++count;
  }
}

PointMeasureSample LimitMeasureSampler::sample(double y, RandomSource& rng) const {
  PointMeasureSample s;
  s.y = y;
  s.eps = eps_;
  s.sigma_y = run(y, rng, [&](double x) {
    s.atoms.push_back(x);
    return true;
  });
  s.bias_bound = y * drift_;
  return s;
}

std::pair<std::size_t, double> LimitMeasureSampler::sample_unstopped(double t,
                                                                     RandomSource& rng) const {
  if (!(t >= 0.0)) throw UsageError("time must be >= 0");
  std::size_t count = 0;
  double y = drift_ * t;
  if (rate_ > 0.0) {
    std::poisson_distribution<std::uint64_t> pois(rate_ * t);
    const std::uint64_t n = pois(rng);
    for (std::uint64_t i = 0; i < n; ++i) {
      const Mark m = draw_mark(rng);
      y += m.x2;
      if (m.x1 > 0.0) ++count;
    }
  }
  return {count, y};
}

double LimitMeasureSampler::sample_Y(double t, RandomSource& rng) const {
  return sample_unstopped(t, rng).second;
}

PointMeasureSample sample_limit_measure(const LevyMeasure2D& lambda, double y, double eps,
                                        RandomSource& rng) {
  const LimitMeasureSampler s(lambda, eps);
  return s.sample(y, rng);
}

std::vector<LaplaceEstimate> limit_laplace_estimates(const LimitMeasureSampler& sampler,
                                                     double y,
                                                     std::span<const TestFunction> fs,
                                                     const ReplicaPlan& plan) {
  auto source = [&](RandomSource& rng, auto&& visit) { sampler.run(y, rng, visit); };
  return estimate_laplace(source, fs, plan);
}

double one_type_kernel_bias(double beta, double b, double eps) {
  const double k = stable_levy_constant(StableParams{beta, b});
  if (k == 0.0 || !(eps > 0.0)) return 0.0;
  // int_0^eps x^{-beta} (1 - e^{-x}) dx, termwise.
  double sum = 0.0;
  double fact = 1.0;
  for (int j = 0; j < 60; ++j) {
    fact *= (j + 1);
    const double e = j + 2 - beta;
    const double term = std::pow(eps, e) / (fact * e);
    sum += (j % 2 == 0 ? term : -term);
    if (term < 1e-18 * std::abs(sum)) break;
  }
  return k * sum;
}

double one_type_kernel_sample(double beta, double b, double x1, double eps,
                              RandomSource& rng) {
  if (!(x1 > 0.0)) return 0.0;
  if (beta == 2.0) return 2.0 * b * x1;
  const double k = stable_levy_constant(StableParams{beta, b});
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("kernel eps must lie in (0, 1)");
  // Envelope k min(x,1) x^{-1-beta}: a power law on [eps, 1) and a Pareto tail.
  const double head_pow = std::pow(eps, 1.0 - beta);
  const double m_head = k * (head_pow - 1.0) / (beta - 1.0);
  const double m_tail = k / beta;
  std::poisson_distribution<std::uint64_t> pois(x1 * (m_head + m_tail));
  const std::uint64_t n = pois(rng);
  double total = x1 * one_type_kernel_bias(beta, b, eps);
  for (std::uint64_t i = 0; i < n; ++i) {
    double x = 0.0;
    if (rng.uniform() * (m_head + m_tail) < m_head) {
      x = std::pow(head_pow - rng.uniform() * (head_pow - 1.0), 1.0 / (1.0 - beta));
    } else {
      x = std::pow(rng.uniform(), -1.0 / beta);
    }
    if (rng.uniform() * std::min(x, 1.0) < -std::expm1(-x)) total += x;
  }
  return total;
}

BallotReport ballot_identity_check(const LevyMeasure2D& lambda, const BallotOptions& opts,
                                   std::uint64_t seed, unsigned threads) {
  if (!finite_activity(lambda)) {
    throw PreconditionError("ballot check needs a finite-activity measure");
  }
  const auto& ye = opts.y_edges;
  const auto& te = opts.t_edges;
  if (ye.size() < 2 || te.size() < 2 || opts.count_classes < 1 || opts.replicas < 2) {
    throw UsageError("ballot check needs bins, classes and replicas");
  }
  const LimitMeasureSampler sampler(lambda, 0.0);
  const std::size_t ny = ye.size() - 1;
  const std::size_t nt = te.size() - 1;
  const std::size_t ncells = opts.count_classes * nt * ny;
  auto bin = [](const std::vector<double>& edges, double v) -> long {
    if (v < edges.front() || v >= edges.back()) return -1;
    return static_cast<long>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
  };
  auto cell = [&](std::size_t count, long tb, long yb) {
    const std::size_t cls = std::min(count, opts.count_classes - 1);
    return static_cast<long>((cls * nt + static_cast<std::size_t>(tb)) * ny +
                             static_cast<std::size_t>(yb));
  };
  struct Hit {
    long cell = -1;
    double value = 0.0;
  };
  const double ywidth = ye.back() - ye.front();
  const double twidth = te.back() - te.front();

  ReplicaPlan lplan{seed, experiment_id("ballot/lhs"), opts.replicas, threads};
  const auto lhs = run_replicas<Hit>(lplan, [&](RandomSource& rng, std::size_t) {
    const double y = ye.front() + ywidth * rng.uniform();
    const auto [sigma, count] = sampler.run_until(y, te.back(), rng);
    const long tb = bin(te, sigma);
    if (tb < 0) return Hit{};
    return Hit{cell(count, tb, bin(ye, y)), ywidth};
  });
  ReplicaPlan rplan{seed, experiment_id("ballot/rhs"), opts.replicas, threads};
  const auto rhs = run_replicas<Hit>(rplan, [&](RandomSource& rng, std::size_t) {
    const double t = te.front() + twidth * rng.uniform();
    const auto [count, yt] = sampler.sample_unstopped(t, rng);
    const double level = t - yt;
    const long yb = bin(ye, level);
    if (yb < 0) return Hit{};
    return Hit{cell(count, bin(te, t), yb), twidth * level / t};
  });

  struct Acc {
    double sum = 0.0;
    double sq = 0.0;
    double hits = 0.0;
  };
  auto accumulate = [&](const std::vector<Hit>& hits) {
    std::vector<Acc> acc(ncells);
    for (const auto& h : hits) {
      if (h.cell < 0) continue;
      auto& a = acc[static_cast<std::size_t>(h.cell)];
      a.sum += h.value;
      a.sq += h.value * h.value;
      a.hits += 1.0;
    }
    return acc;
  };
  const auto la = accumulate(lhs);
  const auto ra = accumulate(rhs);
  const double n = static_cast<double>(opts.replicas);

  BallotReport rep;
  for (std::size_t c = 0; c < ncells; ++c) {
    BallotCell bc;
    bc.count_class = c / (nt * ny);
    bc.t_bin = (c / ny) % nt;
    bc.y_bin = c % ny;
    auto moments = [n](const Acc& a, double& mean, double& se) {
      mean = a.sum / n;
      const double var = std::max(0.0, a.sq / n - mean * mean);
      se = std::sqrt(var / n);
    };
    moments(la[c], bc.lhs, bc.lhs_se);
    moments(ra[c], bc.rhs, bc.rhs_se);
    bc.informative = la[c].hits + ra[c].hits >= opts.min_hits;
    const double se = std::hypot(bc.lhs_se, bc.rhs_se);
    bc.z = se > 0.0 ? (bc.lhs - bc.rhs) / se : 0.0;
    if (bc.informative) {
      ++rep.informative;
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(bc.z));
    }
    rep.cells.push_back(bc);
  }
  const boost::math::normal z;
  const double family_alpha = 2.0 * boost::math::cdf(boost::math::complement(z, opts.family_sigma));
  rep.threshold = bonferroni_z(family_alpha, std::max<std::size_t>(1, rep.informative));
  rep.result = StatTestResult::compare("ballot_identity", rep.max_abs_z, 0.0, 1.0, rep.threshold);
  rep.result.inconclusive = rep.informative < 4;
  if (rep.result.inconclusive) rep.result.pass = false;
  rep.result.detail = std::to_string(rep.informative) + " informative cells of " +
                      std::to_string(ncells);
  return rep;
}

CutoffPassage cutoff_passage_sample(double beta, double b, double x, double eps,
                                    RandomSource& rng) {
  const StableParams sp{beta, b};
  sp.validate();
  if (beta == 2.0) throw UsageError("the cut-off split needs beta < 2");
  if (!(x > 0.0) || !(eps > 0.0 && eps < 1.0)) throw UsageError("need x > 0 and eps in (0,1)");
  const double k = stable_levy_constant(sp);
  const double rate = k * std::pow(eps, -beta) / beta;
  const double down = k * std::pow(eps, 1.0 - beta) / (beta - 1.0);
  double t = 0.0;
  double xh = 0.0;
  double xm = 0.0;
  while (true) {
    const double gap = rng.exponential(rate);
    if (xh - down * gap <= -x) return {t + (xh + x) / down, xm};
    t += gap;
    xh -= down * gap;
    const double jump = eps * std::pow(rng.uniform(), -1.0 / beta);
    xh += std::min(jump, 1.0);
    xm += std::max(jump - 1.0, 0.0);
  }
}

}  // namespace colonist
