#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "colonist/colony_sim.hpp"
#include "colonist/error.hpp"
#include "colonist/offspring.hpp"
#include "colonist/random.hpp"

namespace colonist {

/// Coupled walks S^h_k = xi^h_1 + ... + xi^h_k - k and S^m_k = xi^m_1 + ... .
struct WalkState {
  std::uint64_t k = 0;
  std::int64_t s_h = 0;
  std::uint64_t s_m = 0;

  void step(const Split& s) {
    ++k;
    s_h += static_cast<std::int64_t>(s.homebody) - 1;
    s_m += s.migrant;
  }
};

/// First passage of S^h at -1 and the value of S^m there.
struct PassagePair {
  std::uint64_t tau = 1;
  std::uint64_t migrants = 0;
};

struct AtomSequence {
  std::vector<std::uint64_t> atoms;  // tau_j - tau_{j-1}
  std::uint64_t stopping_index = 0;  // eta_a
  std::uint64_t final_migrants = 0;  // S^m at tau_{eta_a}
};

struct RescaledPassage {
  double time = 0.0;      // tau_{n,[nx]} / alpha(n)
  double migrants = 0.0;  // S^m / n
};

struct AtomStreamSummary {
  std::uint64_t stopping_index = 0;
  std::uint64_t total_population = 0;
  std::uint64_t total_migrants = 0;
  bool completed = false;
};

namespace detail {

inline void charge_walk(const WalkState& w, const SimulationLimits& limits,
                        std::uint64_t done) {
  if (w.k > limits.max_births) {
    throw BudgetExceeded("walk exceeded its step budget", w.k, done);
  }
}

}  // namespace detail

/// The coupled walk itself: every time S^h reaches a new minimum -j the
/// increment tau_j - tau_{j-1} is passed to visit(atom), until
/// j - S^m_{tau_j} = a. visit may return false to stop early.
template <class Visitor>
AtomStreamSummary walk_atoms(const ConcreteModel& model, std::uint64_t a,
                             RandomSource& rng, const SimulationLimits& limits,
                             Visitor&& visit) {
  if (a < 1) throw UsageError("need at least one ancestor");
  AtomStreamSummary sum;
  WalkState w;
  std::uint64_t previous = 0;
  const auto target = static_cast<std::int64_t>(a);
  while (true) {
    w.step(model.draw(rng));
    detail::charge_walk(w, limits, sum.stopping_index);
    if (w.s_h == -static_cast<std::int64_t>(sum.stopping_index + 1)) {
      ++sum.stopping_index;
      sum.total_population = w.k;
      sum.total_migrants = w.s_m;
      if (!visit(w.k - previous)) return sum;
      previous = w.k;
      if (static_cast<std::int64_t>(sum.stopping_index) -
              static_cast<std::int64_t>(w.s_m) ==
          target) {
        break;
      }
    }
  }
  sum.completed = true;
  return sum;
}

/// Atom source for estimate_laplace running the coupled walk step by step.
inline auto coupled_walk_source(const ConcreteModel& model, std::uint64_t a, double scale,
                                SimulationLimits limits = {}) {
  return [&model, a, scale, limits](RandomSource& rng, auto&& visit) {
    walk_atoms(model, a, rng, limits, [&](std::uint64_t atom) {
      return visit(static_cast<double>(atom) / scale);
    });
  };
}

/// Runs the coupled walk step by step until S^h first hits -1.
PassagePair passage_pair(const ConcreteModel& model, RandomSource& rng,
                         const SimulationLimits& limits = {});

/// Passage-time increments of the walk up to eta_a = inf{j : j - S^m = a}.
AtomSequence atoms_via_walk(const ConcreteModel& model, std::uint64_t a,
                            RandomSource& rng, const SimulationLimits& limits = {});

/// Largest n with u_{2n} = binom(2n, n) / 4^n >= u, i.e. the inverse of the
/// tail P(N >= n) = u_{2n} where 2N + 1 is the hitting time of -1 by a simple
/// symmetric walk. Returns nullopt past 2^62.
std::optional<std::uint64_t> symmetric_half_excursions(double u);

/// u_{2n} for any n (table below 65536, asymptotic series above).
double central_binomial_ratio(std::uint64_t n);

/// Exact sampler of (C, M) for the geometric law P(k) = 2^-(k+1) under
/// binomial thinning with probability p. Homebody counts are then geometric
/// with ratio q = (1-p)/(2-p), so C - 1 is half the excursion length of a
/// biased simple walk, drawn from the symmetric one by rejection with
/// acceptance (4q(1-q))^N. Given C the migrant count is negative binomial.
class GeometricThinningPassage {
 public:
  explicit GeometricThinningPassage(double p);
  PassagePair operator()(RandomSource& rng) const;
  double q() const noexcept { return q_; }

 private:
  double p_;
  double q_;
  double log_rho_;
};

/// Draws (C, M) pairs, using the closed form when the model admits one.
class PassageSource {
 public:
  explicit PassageSource(const ConcreteModel& model, SimulationLimits limits = {},
                         bool allow_closed_form = true);
  PassagePair operator()(RandomSource& rng) const;
  bool closed_form() const noexcept {
    return std::holds_alternative<GeometricThinningPassage>(impl_);
  }

 private:
  struct Generic {
    const ConcreteModel* model;
    SimulationLimits limits;
  };
  std::variant<Generic, GeometricThinningPassage> impl_;
};

/// Rescaled bivariate passage walk at level [n x]: the sum of [n x]
/// independent (C, M) pairs.
RescaledPassage passage_process_sample(const ConcreteModel& model, double x,
                                       std::uint64_t n, RandomSource& rng,
                                       const SimulationLimits& limits = {});
RescaledPassage passage_process_sample(const PassageSource& source,
                                       const ConcreteModel& model, double x,
                                       std::uint64_t n, RandomSource& rng);

/// Partition atoms from i.i.d. passage pairs, stopped at eta_a. Each atom
/// is passed to visit(tau, migrants); returning false stops early.
template <class Visitor>
AtomStreamSummary stream_atoms(const PassageSource& source, std::uint64_t a,
                               RandomSource& rng, std::uint64_t max_colonies,
                               Visitor&& visit) {
  if (a < 1) throw UsageError("need at least one ancestor");
  AtomStreamSummary sum;
  // j - S^m, which moves up by one per colony and down by its migrants
  std::int64_t level = 0;
  const auto target = static_cast<std::int64_t>(a);
  while (true) {
    const PassagePair pp = source(rng);
    ++sum.stopping_index;
    level += 1 - static_cast<std::int64_t>(pp.migrants);
    sum.total_population += pp.tau;
    sum.total_migrants += pp.migrants;
    if (!visit(pp.tau, pp.migrants)) return sum;
    if (level == target) break;
    if (sum.stopping_index >= max_colonies) {
      throw BudgetExceeded("atom stream exceeded its colony budget",
                           sum.stopping_index, sum.stopping_index);
    }
  }
  sum.completed = true;
  return sum;
}

/// Atom source for estimate_laplace built on the walk representation.
inline auto walk_partition_source(const PassageSource& source, std::uint64_t a,
                                  double scale,
                                  std::uint64_t max_colonies = 4'000'000'000ULL) {
  return [&source, a, scale, max_colonies](RandomSource& rng, auto&& visit) {
    stream_atoms(source, a, rng, max_colonies, [&](std::uint64_t tau, std::uint64_t) {
      return visit(static_cast<double>(tau) / scale);
    });
  };
}

/// Hitting time of -level by a simple symmetric random walk, by inversion of
/// its exact tail. nullopt when it exceeds 2^62 steps.
std::optional<std::uint64_t> symmetric_walk_hitting_time(std::uint64_t level,
                                                         RandomSource& rng);

/// Total population of a critical geometric Galton-Watson forest with `a`
/// roots, (T_{-a} + a) / 2. nullopt past the 2^62 cap.
std::optional<std::uint64_t> geometric_forest_total_population(std::uint64_t a,
                                                               RandomSource& rng);

}  // namespace colonist
