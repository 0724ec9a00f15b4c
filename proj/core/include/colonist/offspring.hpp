#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "colonist/random.hpp"

namespace colonist {

enum class LawKind { Geometric, StablePgf, Custom };

/// Reproduction law of the total number of children of one individual.
///
/// Three families are supported:
///  - Geometric: P(k) = 2^-(k+1); mean 1, variance 2.
///  - StablePgf(beta): generating function s + (1-s)^beta / beta, which is
///    critical and lies in the domain of attraction of a spectrally positive
///    beta-stable law. Sampled from an inverse-CDF table truncated at
///    `max_support` and renormalised; the dropped tail mass is reported.
///  - Custom: an explicit probability vector.
///
/// Laws are immutable and cheap to copy (tables are shared).
class OffspringLaw {
 public:
  static OffspringLaw geometric();
  static OffspringLaw stable_pgf(double beta,
                                 std::uint64_t max_support = 10'000'000);
  static OffspringLaw custom(std::vector<double> probabilities);

  LawKind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  /// +infinity for the stable family.
  double variance() const noexcept { return variance_; }
  /// Stability index of the limiting Levy process (2 for finite variance).
  double beta() const noexcept { return beta_; }
  /// Coefficient b of the limit exponent psi(q) = b q^beta under the
  /// canonical time scale of the family.
  double b() const noexcept { return b_; }
  /// Probability mass removed by truncating the stable table.
  double truncated_mass() const noexcept { return truncated_mass_; }

  /// Probability of k children under the law actually sampled.
  double probability(std::uint64_t k) const;
  /// Smallest k with P(xi <= k) >= u, for u in (0,1).
  std::uint64_t quantile(double u) const;
  std::uint64_t sample(RandomSource& rng) const { return quantile(rng.uniform()); }

 private:
  OffspringLaw() = default;

  LawKind kind_ = LawKind::Geometric;
  double mean_ = 1.0;
  double variance_ = 2.0;
  double beta_ = 2.0;
  double b_ = 1.0;
  double truncated_mass_ = 0.0;
  // Cumulative distribution for table-backed laws; cdf.back() == 1.
  std::shared_ptr<const std::vector<double>> cdf_;
};

/// Unnormalised stable-pgf weights p_0..p_{count-1} from the
/// binomial-coefficient recurrence.
std::vector<double> stable_pgf_probabilities(double beta, std::uint64_t count);

inline std::uint64_t sample_offspring(const OffspringLaw& law,
                                      RandomSource& rng) {
  return law.sample(rng);
}

/// Every child independently migrates with probability p.
struct BinomialThinning {
  double p = 0.0;
};

/// All children stay with probability exp(-xi/scale), otherwise all migrate.
struct AllOrNothing {
  double scale = 1.0;
};

/// The first `threshold` children stay, the rest migrate.
struct CutOff {
  std::uint64_t threshold = 0;
};

using MigrationRule = std::variant<BinomialThinning, AllOrNothing, CutOff>;

struct Split {
  std::uint64_t homebody = 0;
  std::uint64_t migrant = 0;
};

Split split_offspring(const MigrationRule& rule, std::uint64_t children,
                      RandomSource& rng);

enum class RuleKind { Thinning, AllOrNothing, CutOff };

/// A law together with a fixed (homebody, migrant) splitting rule.
struct ConcreteModel {
  OffspringLaw law;
  MigrationRule rule;
  std::uint64_t alpha = 1;      // time/size scale
  std::uint64_t ancestors = 1;  // a(n)
  std::uint64_t index = 1;      // n

  std::uint64_t draw_children(RandomSource& rng) const { return law.sample(rng); }
  Split draw(RandomSource& rng) const {
    return split_offspring(rule, law.sample(rng), rng);
  }
};

/// Sequence of models indexed by n realising the large-population,
/// rare-migration regime. alpha(n) is n^2 for finite-variance laws and
/// ceil(beta n^beta) for the stable family; a(n) = ceil(a n).
struct ModelFamily {
  OffspringLaw law = OffspringLaw::geometric();
  RuleKind rule = RuleKind::Thinning;
  double c = 1.0;  // migration intensity for thinning
  double a = 1.0;  // limit ancestor mass

  std::uint64_t alpha(std::uint64_t n) const;
  std::uint64_t ancestors(std::uint64_t n) const;
  MigrationRule rule_at(std::uint64_t n) const;
};

ConcreteModel model_at(const ModelFamily& family, std::uint64_t n);

/// Model with explicit rule and unit scales, for small exact experiments.
ConcreteModel fixed_model(OffspringLaw law, MigrationRule rule,
                          std::uint64_t ancestors = 1);

}  // namespace colonist
