#include "colonist/walk_rep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

namespace colonist {

namespace {

constexpr std::uint64_t kTableSize = 65536;
constexpr double kHitCap = 4611686018427387904.0;  // 2^62

const std::vector<double>& central_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kTableSize);
    t[0] = 1.0;
    for (std::uint64_t n = 1; n < kTableSize; ++n) {
      t[n] = t[n - 1] * static_cast<double>(2 * n - 1) / static_cast<double>(2 * n);
    }
    return t;
  }();
  return table;
}

// Number of failures before r successes, failure probability `fail`.
std::uint64_t negative_binomial(std::uint64_t r, double fail, RandomSource& rng) {
  if (r == 0 || fail <= 0.0) return 0;
  const double rd = static_cast<double>(r);
  if (rd * fail < 8.0 * (1.0 - fail)) {
    // Sequential inversion; the expected number of steps is 1 + mean.
    double u = rng.uniform();
    double pk = std::exp(rd * std::log1p(-fail));
    std::uint64_t k = 0;
    while (u > pk && k < 4096) {
      u -= pk;
      pk *= (rd + static_cast<double>(k)) / static_cast<double>(k + 1) * fail;
      ++k;
      if (pk == 0.0) break;
    }
    if (u <= pk || pk == 0.0) return k;
  }
  std::negative_binomial_distribution<std::uint64_t> nb(r, 1.0 - fail);
  return nb(rng);
}

}  // namespace

double central_binomial_ratio(std::uint64_t n) {
  if (n < kTableSize) return central_table()[n];
  const double x = static_cast<double>(n);
  const double inv = 1.0 / x;
  return std::exp(-0.5 * std::log(std::numbers::pi * x) - inv / 8.0 +
                  inv * inv * inv / 192.0);
}

std::optional<std::uint64_t> symmetric_half_excursions(double u) {
  if (u >= 1.0) return 0;
  const auto& t = central_table();
  if (u <= 0.0) return std::nullopt;
  if (u <= t.back()) {
    const double guess = 1.0 / (std::numbers::pi * u * u) - 0.25;
    if (!(guess < kHitCap)) return std::nullopt;
    auto n = std::max<std::uint64_t>(kTableSize - 1, static_cast<std::uint64_t>(guess));
    while (central_binomial_ratio(n + 1) >= u) ++n;
    while (central_binomial_ratio(n) < u) --n;
    return n;
  }
  // u_{2n} ~ (pi (n + 1/4))^{-1/2}, so the guess is within a step or two.
  const double guess = 1.0 / (std::numbers::pi * u * u) - 0.25;
  auto n = static_cast<std::size_t>(std::clamp(guess, 0.0, static_cast<double>(t.size() - 1)));
  while (n + 1 < t.size() && t[n + 1] >= u) ++n;
  while (t[n] < u) --n;
  return n;
}

PassagePair passage_pair(const ConcreteModel& model, RandomSource& rng,
                         const SimulationLimits& limits) {
  WalkState w;
  while (true) {
    w.step(model.draw(rng));
    detail::charge_walk(w, limits, 0);
    if (w.s_h == -1) return {w.k, w.s_m};
  }
}

AtomSequence atoms_via_walk(const ConcreteModel& model, std::uint64_t a,
                            RandomSource& rng, const SimulationLimits& limits) {
  AtomSequence out;
  const AtomStreamSummary sum = walk_atoms(model, a, rng, limits, [&](std::uint64_t atom) {
    out.atoms.push_back(atom);
    return true;
  });
  out.stopping_index = sum.stopping_index;
  out.final_migrants = sum.total_migrants;
  return out;
}

GeometricThinningPassage::GeometricThinningPassage(double p) : p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("thinning probability must lie in [0,1]");
  q_ = (1.0 - p) / (2.0 - p);
  const double d = 1.0 - 2.0 * q_;
  log_rho_ = std::log1p(-d * d);
}

PassagePair GeometricThinningPassage::operator()(RandomSource& rng) const {
  std::uint64_t n = 0;
  while (true) {
    const auto draw = symmetric_half_excursions(rng.uniform());
    if (!draw) {
      if (log_rho_ == 0.0) {
        throw BudgetExceeded("critical colony beyond 2^62 individuals", 0, 0);
      }
      continue;
    }
    n = *draw;
    if (n == 0 || log_rho_ == 0.0) break;
    const double log_accept = static_cast<double>(n) * log_rho_;
    if (log_accept > -1e-17 || rng.uniform() < std::exp(log_accept)) break;
  }
  PassagePair out;
  out.tau = n + 1;
  out.migrants = negative_binomial(2 * n + 1, p_ / 2.0, rng);
  return out;
}

PassageSource::PassageSource(const ConcreteModel& model, SimulationLimits limits,
                             bool allow_closed_form)
    : impl_(Generic{&model, limits}) {
  if (allow_closed_form && model.law.kind() == LawKind::Geometric) {
    if (const auto* thin = std::get_if<BinomialThinning>(&model.rule)) {
      impl_ = GeometricThinningPassage(std::clamp(thin->p, 0.0, 1.0));
    }
  }
}

PassagePair PassageSource::operator()(RandomSource& rng) const {
  if (const auto* g = std::get_if<Generic>(&impl_)) {
    return passage_pair(*g->model, rng, g->limits);
  }
  return std::get<GeometricThinningPassage>(impl_)(rng);
}

RescaledPassage passage_process_sample(const PassageSource& source,
                                       const ConcreteModel& model, double x,
                                       std::uint64_t n, RandomSource& rng) {
  if (!(x > 0.0) || n < 1) throw UsageError("passage sample needs x > 0 and n >= 1");
  const auto level = static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * x));
  std::uint64_t tau = 0;
  std::uint64_t migrants = 0;
  for (std::uint64_t k = 0; k < level; ++k) {
    const PassagePair pp = source(rng);
    tau += pp.tau;
    migrants += pp.migrants;
  }
  return {static_cast<double>(tau) / static_cast<double>(model.alpha),
          static_cast<double>(migrants) / static_cast<double>(n)};
}

RescaledPassage passage_process_sample(const ConcreteModel& model, double x,
                                       std::uint64_t n, RandomSource& rng,
                                       const SimulationLimits& limits) {
  const PassageSource source(model, limits, false);
  return passage_process_sample(source, model, x, n, rng);
}

namespace {

// P(T > m) for the hitting time T of -level, m = level + 2j:
// P(j < B <= j + level) with B ~ Binomial(m, 1/2).
double hitting_survival(std::uint64_t level, std::uint64_t j) {
  const std::uint64_t m = level + 2 * j;
  const double md = static_cast<double>(m);
  const double hi = static_cast<double>(j + level);
  const double lo = static_cast<double>(j);
  const double f_hi = (j + level >= m) ? 1.0 : boost::math::ibeta(md - hi, hi + 1, 0.5);
  const double f_lo = boost::math::ibeta(md - lo, lo + 1, 0.5);
  return std::max(0.0, f_hi - f_lo);
}

}  // namespace

std::optional<std::uint64_t> symmetric_walk_hitting_time(std::uint64_t level,
                                                         RandomSource& rng) {
  if (level == 0) return 0;
  if (level == 1) {
    const auto n = symmetric_half_excursions(rng.uniform());
    if (!n) return std::nullopt;
    return 2 * *n + 1;
  }
  const double v = rng.uniform();
  if (hitting_survival(level, 0) <= v) return level;
  std::uint64_t lo = 0;  // S(lo) > v
  std::uint64_t hi = 1;
  while (hitting_survival(level, hi) > v) {
    lo = hi;
    hi *= 2;
    if (static_cast<double>(level) + 2.0 * static_cast<double>(hi) > kHitCap) {
      return std::nullopt;
    }
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (hitting_survival(level, mid) > v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return level + 2 * hi;
}

std::optional<std::uint64_t> geometric_forest_total_population(std::uint64_t a,
                                                               RandomSource& rng) {
  const auto t = symmetric_walk_hitting_time(a, rng);
  if (!t) return std::nullopt;
  return (*t + a) / 2;
}

}  // namespace colonist
