#include "colonist/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "colonist/error.hpp"

namespace colonist {

namespace {

constexpr double kSumTolerance = 1e-12;

std::shared_ptr<const std::vector<double>> make_cdf(const std::vector<double>& w,
                                                    double total) {
  auto cdf = std::make_shared<std::vector<double>>(w.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k];
    (*cdf)[k] = acc / total;
  }
  cdf->back() = 1.0;
  return cdf;
}

}  // namespace

std::vector<double> stable_pgf_probabilities(double beta, std::uint64_t count) {
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  if (count == 0) return p;
  p.push_back(1.0 / beta);
  if (count == 1) return p;
  p.push_back(0.0);
  // w_k = (-1)^k binom(beta, k) / beta, w_k = w_{k-1} (k - 1 - beta) / k.
  double w = (beta - 1.0) / 2.0;
  for (std::uint64_t k = 2; k < count; ++k) {
    if (k > 2) w *= (static_cast<double>(k) - 1.0 - beta) / static_cast<double>(k);
    if (w <= 0.0) break;  // beta == 2 has finite support {0, 2}
    p.push_back(w);
  }
  return p;
}

OffspringLaw OffspringLaw::geometric() {
  OffspringLaw law;
  law.kind_ = LawKind::Geometric;
  law.mean_ = 1.0;
  law.variance_ = 2.0;
  law.beta_ = 2.0;
  law.b_ = 1.0;
  return law;
}

OffspringLaw OffspringLaw::stable_pgf(double beta, std::uint64_t max_support) {
  if (!(beta > 1.0 && beta <= 2.0)) {
    throw UsageError("stable offspring law needs beta in (1,2], got " +
                     std::to_string(beta));
  }
  if (max_support < 3) throw UsageError("stable table needs at least 3 entries");
  std::vector<double> p = stable_pgf_probabilities(beta, max_support);
  double total = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double kd = static_cast<double>(k);
    total += p[k];
    first += kd * p[k];
    second += kd * kd * p[k];
  }
  OffspringLaw law;
  law.kind_ = LawKind::StablePgf;
  law.truncated_mass_ = std::max(0.0, 1.0 - total);
  law.mean_ = first / total;
  law.variance_ = beta < 2.0 ? std::numeric_limits<double>::infinity()
                             : second / total - law.mean_ * law.mean_;
  law.beta_ = beta;
  law.b_ = 1.0;
  law.cdf_ = make_cdf(p, total);
  return law;
}

OffspringLaw OffspringLaw::custom(std::vector<double> probabilities) {
  if (probabilities.empty()) throw UsageError("empty offspring law");
  double total = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    const double pk = probabilities[k];
    if (!(pk >= 0.0) || !std::isfinite(pk)) {
      throw UsageError("offspring probability " + std::to_string(k) +
                       " is negative or not finite");
    }
    const double kd = static_cast<double>(k);
    total += pk;
    first += kd * pk;
    second += kd * kd * pk;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw UsageError("offspring probabilities sum to " + std::to_string(total));
  }
  if (first > 1.0 + kSumTolerance) {
    throw UsageError("offspring mean " + std::to_string(first) +
                     " exceeds 1 (supercritical)");
  }
  if (probabilities.size() > 1 && probabilities[1] >= 1.0 - kSumTolerance) {
    throw UsageError("degenerate offspring law xi == 1");
  }
  OffspringLaw law;
  law.kind_ = LawKind::Custom;
  law.mean_ = first;
  law.variance_ = second - first * first;
  law.beta_ = 2.0;
  law.b_ = law.variance_ / 2.0;
  law.cdf_ = make_cdf(probabilities, total);
  return law;
}

double OffspringLaw::probability(std::uint64_t k) const {
  if (kind_ == LawKind::Geometric) {
    return std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(k + 1, 2000)));
  }
  const auto& cdf = *cdf_;
  if (k >= cdf.size()) return 0.0;
  return k == 0 ? cdf[0] : cdf[k] - cdf[k - 1];
}

std::uint64_t OffspringLaw::quantile(double u) const {
  if (kind_ == LawKind::Geometric) {
    // P(xi <= k) = 1 - 2^-(k+1).
    const double level = -std::log1p(-u) / std::log(2.0);
    const double k = std::ceil(level) - 1.0;
    return k <= 0.0 ? 0 : static_cast<std::uint64_t>(k);
  }
  const auto& cdf = *cdf_;
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) return cdf.size() - 1;
  return static_cast<std::uint64_t>(it - cdf.begin());
}

Split split_offspring(const MigrationRule& rule, std::uint64_t children,
                      RandomSource& rng) {
  if (children == 0) return {};
  return std::visit(
      [&](const auto& r) -> Split {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, BinomialThinning>) {
          if (r.p <= 0.0) return {children, 0};
          if (r.p >= 1.0) return {0, children};
          std::uint64_t m;
          if (children == 1) {
            m = rng.uniform() < r.p ? 1 : 0;
          } else {
            std::binomial_distribution<std::uint64_t> dist(children, r.p);
            m = dist(rng.engine());
          }
          return {children - m, m};
        } else if constexpr (std::is_same_v<R, AllOrNothing>) {
          const double stay = std::exp(-static_cast<double>(children) / r.scale);
          if (rng.uniform() < stay) return {children, 0};
          return {0, children};
        } else {
          const std::uint64_t h = std::min(children, r.threshold);
          return {h, children - h};
        }
      },
      rule);
}

std::uint64_t ModelFamily::alpha(std::uint64_t n) const {
  if (n < 1) throw UsageError("model index n must be >= 1");
  const double nd = static_cast<double>(n);
  if (law.kind() == LawKind::StablePgf) {
    const double v = std::ceil(law.beta() * std::pow(nd, law.beta()));
    if (v > 9.0e18) throw UsageError("alpha(n) overflows for n=" + std::to_string(n));
    return static_cast<std::uint64_t>(v);
  }
  if (n > 3'000'000'000ULL) throw UsageError("alpha(n) overflows for n=" + std::to_string(n));
  return n * n;
}

std::uint64_t ModelFamily::ancestors(std::uint64_t n) const {
  if (n < 1) throw UsageError("model index n must be >= 1");
  if (!(a > 0.0)) throw UsageError("ancestor mass a must be positive");
  return static_cast<std::uint64_t>(std::ceil(a * static_cast<double>(n)));
}

MigrationRule ModelFamily::rule_at(std::uint64_t n) const {
  if (n < 1) throw UsageError("model index n must be >= 1");
  switch (rule) {
    case RuleKind::Thinning: {
      const double p = c * static_cast<double>(n) / static_cast<double>(alpha(n));
      return BinomialThinning{std::min(1.0, p)};
    }
    case RuleKind::AllOrNothing:
      return AllOrNothing{static_cast<double>(n)};
    case RuleKind::CutOff:
      return CutOff{n};
  }
  throw UsageError("unknown migration rule");
}

ConcreteModel model_at(const ModelFamily& family, std::uint64_t n) {
  ConcreteModel m{family.law, family.rule_at(n), family.alpha(n),
                  family.ancestors(n), n};
  return m;
}

ConcreteModel fixed_model(OffspringLaw law, MigrationRule rule,
                          std::uint64_t ancestors) {
  return ConcreteModel{std::move(law), rule, 1, ancestors, 1};
}

}  // namespace colonist
