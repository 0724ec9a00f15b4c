#include "colonist/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "colonist/error.hpp"
#include "colonist/stable.hpp"

namespace colonist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// (e^{-y} - 1 + y) / y^2, finite at 0 so the small-jump integrand never forms 0 * inf.
double em1_ratio(double y) {
  if (std::abs(y) < 1e-3) return 0.5 - y * (1.0 / 6.0 - y / 24.0);
  return (std::expm1(-y) + y) / (y * y);
}

}  // namespace

std::string CumulantResult::to_json() const {
  nlohmann::ordered_json j;
  j["value"] = value;
  j["residual"] = residual;
  j["iterations"] = iterations;
  j["stderr"] = stderr_propagated;
  return j.dump();
}

TabulatedExponent TabulatedExponent::from_function(
    const std::function<double(double, double)>& psi, std::vector<double> q_grid,
    std::vector<double> r_grid) {
  auto sorted = [](const std::vector<double>& g) {
    return g.size() >= 2 && std::is_sorted(g.begin(), g.end()) &&
           std::adjacent_find(g.begin(), g.end()) == g.end();
  };
  if (!sorted(q_grid) || !sorted(r_grid)) {
    throw UsageError("tabulated exponent needs increasing grids with at least two points");
  }
  TabulatedExponent t;
  t.values.reserve(q_grid.size() * r_grid.size());
  for (double q : q_grid) {
    for (double r : r_grid) t.values.push_back(psi(q, r));
  }
  t.q_grid = std::move(q_grid);
  t.r_grid = std::move(r_grid);
  return t;
}

double TabulatedExponent::operator()(double q, double r) const {
  auto locate = [](const std::vector<double>& g, double x) {
    if (x < g.front() || x > g.back()) throw NumericError("tabulated exponent queried off grid");
    auto it = std::upper_bound(g.begin(), g.end(), x);
    std::size_t i = it == g.end() ? g.size() - 2 : static_cast<std::size_t>(it - g.begin()) - 1;
    i = std::min(i, g.size() - 2);
    return std::pair{i, (x - g[i]) / (g[i + 1] - g[i])};
  };
  const auto [i, u] = locate(q_grid, q);
  const auto [j, v] = locate(r_grid, r);
  const std::size_t nr = r_grid.size();
  const double a = values[i * nr + j];
  const double b = values[i * nr + j + 1];
  const double c = values[(i + 1) * nr + j];
  const double d = values[(i + 1) * nr + j + 1];
  return (1 - u) * ((1 - v) * a + v * b) + u * ((1 - v) * c + v * d);
}

double evaluate_psi(const LaplaceExponent& psi, double q, double r) {
  return std::visit(
      Overloaded{[&](const StablePlusDrift& p) {
                   return p.b * std::pow(q, p.beta) + p.c * q - p.c * r;
                 },
                 [&](const OneTypeExponent& p) {
                   return p.b * (std::pow(q + 1.0, p.beta) - 1.0) + one_type_psi0(p.beta, p.b, r);
                 },
                 [&](const TabulatedExponent& t) { return t(q, r); }},
      psi);
}

bool exponent_sign_conditions(const LaplaceExponent& psi, std::span<const double> grid) {
  for (double x : grid) {
    const double scale = 1e-12 * (1.0 + std::abs(x));
    if (evaluate_psi(psi, x, x) < -scale) return false;
    if (evaluate_psi(psi, 0.0, x) > scale) return false;
  }
  return true;
}

TabulatedExponent cutoff_exponent(double beta, double b, std::vector<double> q_grid,
                                  std::vector<double> r_grid) {
  const StableParams sp{beta, b};
  sp.validate();
  if (beta == 2.0) throw UsageError("the cut-off split needs beta < 2");
  const double k = stable_levy_constant(sp);
  auto psi = [&](double q, double r) {
    auto head = [&](double x) { return q * q * em1_ratio(q * x) * k * std::pow(x, 1.0 - beta); };
    auto tail = [&](double x) {
      return (std::expm1(-q - r * (x - 1.0)) + q * x) * k * std::pow(x, -1.0 - beta);
    };
    return integrate_singular(head, 0.0, 1.0).value + integrate_to_infinity(tail, 1.0).value;
  };
  return TabulatedExponent::from_function(psi, std::move(q_grid), std::move(r_grid));
}

CumulantResult solve_K_empirical(std::span<const PassagePair> samples, const TestFunction& f,
                                 double scale) {
  if (samples.empty()) throw UsageError("solve_K_empirical needs samples");
  if (!(scale > 0.0)) throw UsageError("scale must be positive");
  CumulantResult res;
  if (f.is_zero()) return res;

  // Compress to distinct (M, f) pairs with counts.
  std::map<std::pair<std::uint64_t, double>, double> groups;
  double mean_m = 0.0;
  bool any_weight = false;
  bool any_free = false;
  for (const auto& s : samples) {
    const double fv = f(static_cast<double>(s.tau) / scale);
    groups[{s.migrants, fv}] += 1.0;
    mean_m += static_cast<double>(s.migrants);
    any_weight = any_weight || fv > 0.0;
    any_free = any_free || s.migrants == 0;
  }
  const double n = static_cast<double>(samples.size());
  mean_m /= n;
  if (!any_weight) {
    if (mean_m < 1.0) return res;
    throw DegenerateInput("test function vanishes on every sample and mean M >= 1");
  }
  if (!any_free) {
    throw DegenerateInput("every sample has M >= 1; exp(-lambda) = mean(...) has no root");
  }
  struct Group {
    double m;
    double f;
    double count;
  };
  std::vector<Group> g;
  g.reserve(groups.size());
  for (const auto& [key, count] : groups) {
    g.push_back({static_cast<double>(key.first), key.second, count});
  }

  // log mean(exp(-f - lam M)) and the tilted mean of M.
  auto moments = [&](double lam, double& log_mean, double& tilted_m) {
    double top = -kInf;
    for (const auto& x : g) top = std::max(top, -x.f - lam * x.m);
    double s = 0.0;
    double sm = 0.0;
    for (const auto& x : g) {
      const double w = x.count * std::exp(-x.f - lam * x.m - top);
      s += w;
      sm += w * x.m;
    }
    log_mean = top + std::log(s / n);
    tilted_m = sm / s;
  };
  auto G = [&](double lam) {
    double lm = 0.0;
    double tm = 0.0;
    moments(lam, lm, tm);
    return lam + lm;
  };
  auto dG = [&](double lam) {
    double lm = 0.0;
    double tm = 0.0;
    moments(lam, lm, tm);
    return 1.0 - tm;
  };
  const double hi = find_upper_bracket(G, 1.0);
  const RootResult r = solve_bracketed(G, dG, 0.0, hi, hi);
  res.value = r.root;
  res.residual = r.residual;
  res.lo = r.lo;
  res.hi = r.hi;
  res.iterations = r.iterations;

  // Delta method: lambda moves by -(dm/m)/G'(lambda) when the sample mean m moves by dm.
  double mean = 0.0;
  for (const auto& x : g) mean += x.count * std::exp(-x.f - r.root * x.m);
  mean /= n;
  double var = 0.0;
  for (const auto& x : g) {
    const double d = std::exp(-x.f - r.root * x.m) - mean;
    var += x.count * d * d;
  }
  var /= std::max(1.0, n - 1.0);
  const double slope = dG(r.root);
  res.stderr_propagated = std::sqrt(var / n) / (mean * slope);
  return res;
}

CumulantResult solve_kappa(const LevyMeasure2D& lambda, const TestFunction& f,
                           const QuadratureSpec& quad) {
  const MassCheck mc = check_mass_condition(lambda);
  if (!mc.pass) {
    throw PreconditionError("mass condition violated: int x2 dLambda = " +
                            std::to_string(mc.value));
  }
  CumulantResult res;
  if (f.is_zero()) return res;
  const double q0 = laplace_integral(lambda, f, 0.0, quad).value;
  if (!(q0 > 0.0)) return res;
  double last_error = 0.0;
  auto F = [&](double lam) {
    const LaplaceIntegral li = laplace_integral(lambda, f, lam, quad);
    last_error = li.error;
    return lam - li.value;
  };
  auto dF = [&](double lam) { return 1.0 - laplace_integral(lambda, f, lam, quad).derivative; };
  const double hi = find_upper_bracket(F, q0);
  const RootResult r = solve_bracketed(F, dF, 0.0, hi, hi);
  res.value = r.root;
  res.residual = F(r.root);
  res.lo = r.lo;
  res.hi = r.hi;
  res.iterations = r.iterations;
  res.quadrature_error = last_error;
  return res;
}

double phi_neutral(double b, double beta, double c, double q) {
  if (!(b > 0.0) || !(beta > 1.0 && beta <= 2.0) || !(c >= 0.0) || !(q >= 0.0)) {
    throw UsageError("phi_neutral needs b > 0, beta in (1,2], c >= 0, q >= 0");
  }
  if (q == 0.0) return 0.0;
  if (c == 0.0) return std::pow(q / b, 1.0 / beta);
  // Newton from above on a convex increasing function decreases
  // monotonically to the root; stop once it no longer moves down.
  long double z = std::min(std::pow(q / b, 1.0 / beta), q / c);
  const long double lb = b;
  const long double lc = c;
  const long double lq = q;
  const long double lbeta = beta;
  for (int it = 0; it < 200; ++it) {
    const long double zb1 = std::pow(z, lbeta - 1.0L);
    const long double g = lb * zb1 * z + lc * z - lq;
    const long double d = lb * lbeta * zb1 + lc;
    const long double next = z - g / d;
    if (!(next < z)) break;
    z = next;
  }
  return static_cast<double>(z);
}

double invert_psi(const LaplaceExponent& psi, double q, double r) {
  if (!(q >= 0.0) || !(r >= 0.0)) throw UsageError("invert_psi needs q, r >= 0");
  return std::visit(
      Overloaded{[&](const StablePlusDrift& p) { return phi_neutral(p.b, p.beta, p.c, q + p.c * r); },
                 [&](const OneTypeExponent& p) {
                   const double t = (q - one_type_psi0(p.beta, p.b, r)) / p.b;
                   return std::expm1(std::log1p(t) / p.beta);
                 },
                 [&](const TabulatedExponent& t) {
                   auto g = [&](double z) { return t(z, r) - q; };
                   // Largest grid point where g <= 0, then bisect to the crossing.
                   std::size_t i = t.q_grid.size();
                   while (i > 0 && g(t.q_grid[i - 1]) > 0.0) --i;
                   if (i == 0) throw NumericError("tabulated exponent: root below the grid");
                   if (i == t.q_grid.size()) throw NumericError("tabulated exponent: root above the grid");
                   RootOptions opts;
                   opts.abs_tol = 0.0;
                   opts.rel_tol = 1e-12;
                   return solve_bracketed(g, {}, t.q_grid[i - 1], t.q_grid[i], std::nullopt, opts)
                       .root;
                 }},
      psi);
}

double kappa_axes(const Measure1D& first, const Measure1D& second, const TestFunction& f) {
  if (f.is_zero()) return 0.0;
  const auto& bp = f.breakpoints();
  double q = 0.0;
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    double mass = 0.0;
    if (const auto* a = std::get_if<std::vector<Atom1D>>(&first.rep())) {
      for (const auto& at : *a) {
        if (at.x >= bp[i] && at.x < bp[i + 1]) mass += at.mass;
      }
    } else {
      mass = first.mass_above(bp[i]) - first.mass_above(bp[i + 1]);
    }
    q += -std::expm1(-f.values()[i]) * mass;
  }
  if (!(q > 0.0)) return 0.0;
  if (second.is_zero()) return q;
  auto G = [&](double z) { return z - second.exponent(z) - q; };
  auto dG = [&](double z) { return 1.0 - second.exponent_derivative(z); };
  const double hi = find_upper_bracket(G, q);
  return solve_bracketed(G, dG, 0.0, hi, hi).root;
}

}  // namespace colonist
