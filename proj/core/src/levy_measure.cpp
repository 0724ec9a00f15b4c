#include "colonist/levy_measure.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "colonist/error.hpp"

namespace colonist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double ts_density(const TemperedStable& ts, double x) {
  if (!(x > 0.0)) return 0.0;
  return ts.scale * std::exp(-(1.0 + ts.alpha) * std::log(x) - ts.theta * x);
}

}  // namespace

Measure1D Measure1D::atoms(std::vector<Atom1D> atoms) {
  for (const auto& a : atoms) {
    if (!(a.x > 0.0) || !(a.mass >= 0.0) || !std::isfinite(a.x) || !std::isfinite(a.mass)) {
      throw UsageError("atoms need positive location and nonnegative mass");
    }
  }
  return Measure1D(Rep(std::move(atoms)));
}

Measure1D Measure1D::tempered_stable(double scale, double alpha, double theta) {
  if (!(scale >= 0.0) || !(alpha > 0.0 && alpha < 1.0) || !(theta >= 0.0)) {
    throw UsageError("tempered stable measure needs scale >= 0, alpha in (0,1), theta >= 0");
  }
  return Measure1D(Rep(TemperedStable{scale, alpha, theta}));
}

Measure1D Measure1D::power_density(std::function<double(double)> density, double alpha,
                                   double envelope) {
  if (!density || !(alpha > 0.0 && alpha < 1.0) || !(envelope > 0.0)) {
    throw UsageError("power density needs a function, alpha in (0,1) and an envelope");
  }
  return Measure1D(Rep(PowerDensity{std::move(density), alpha, envelope}));
}

bool Measure1D::finite_activity() const noexcept {
  if (const auto* ts = std::get_if<TemperedStable>(&rep_)) return ts->scale == 0.0;
  return std::holds_alternative<std::vector<Atom1D>>(rep_);
}

bool Measure1D::is_zero() const noexcept {
  if (const auto* a = std::get_if<std::vector<Atom1D>>(&rep_)) {
    for (const auto& at : *a) {
      if (at.mass > 0.0) return false;
    }
    return true;
  }
  if (const auto* ts = std::get_if<TemperedStable>(&rep_)) return ts->scale == 0.0;
  return false;
}

QuadratureResult Measure1D::integrate(const RealFn& g, double lo, double hi,
                                      const QuadratureSpec& spec) const {
  if (!(hi > lo)) return {};
  if (const auto* a = std::get_if<std::vector<Atom1D>>(&rep_)) {
    QuadratureResult r;
    for (const auto& at : *a) {
      if (at.x >= lo && at.x < hi) r.value += at.mass * g(at.x);
    }
    return r;
  }
  RealFn weighted;
  if (const auto* ts = std::get_if<TemperedStable>(&rep_)) {
    if (ts->scale == 0.0) return {};
    weighted = [&g, ts](double x) { return g(x) * ts_density(*ts, x); };
  } else {
    const auto& pd = std::get<PowerDensity>(rep_);
    weighted = [&g, &pd](double x) { return x > 0.0 ? g(x) * pd.density(x) : 0.0; };
  }
  if (lo <= 0.0) {
    if (std::isinf(hi)) return integrate_to_infinity(weighted, 0.0, spec);
    return integrate_singular(weighted, 0.0, hi, spec);
  }
  if (std::isinf(hi)) return integrate_to_infinity(weighted, lo, spec);
  return colonist::integrate(weighted, lo, hi, spec);
}

double Measure1D::mass_above(double eps) const {
  return std::visit(
      Overloaded{
          [&](const std::vector<Atom1D>& a) {
            double m = 0.0;
            for (const auto& at : a) {
              if (at.x > eps) m += at.mass;
            }
            return m;
          },
          [&](const TemperedStable& ts) {
            if (ts.scale == 0.0) return 0.0;
            if (!(eps > 0.0)) return kInf;
            if (ts.theta == 0.0) return ts.scale * std::pow(eps, -ts.alpha) / ts.alpha;
            const double z = ts.theta * eps;
            const double upper = boost::math::tgamma(1.0 - ts.alpha, z);
            return ts.scale * std::pow(ts.theta, ts.alpha) *
                   (std::pow(z, -ts.alpha) * std::exp(-z) - upper) / ts.alpha;
          },
          [&](const PowerDensity&) {
            if (!(eps > 0.0)) return kInf;
            return integrate([](double) { return 1.0; }, eps, kInf).value;
          }},
      rep_);
}

double Measure1D::exponent(double s) const {
  if (s == 0.0) return 0.0;
  if (const auto* ts = std::get_if<TemperedStable>(&rep_)) {
    const double k = ts->scale * std::tgamma(1.0 - ts->alpha) / ts->alpha;
    if (ts->theta == 0.0) return k * std::pow(s, ts->alpha);
    return k * std::pow(ts->theta, ts->alpha) *
           std::expm1(ts->alpha * std::log1p(s / ts->theta));
  }
  return integrate([s](double x) { return -std::expm1(-s * x); }, 0.0, kInf).value;
}

double Measure1D::exponent_derivative(double s) const {
  if (const auto* ts = std::get_if<TemperedStable>(&rep_)) {
    if (ts->scale == 0.0) return 0.0;
    if (ts->theta + s == 0.0) return kInf;
    return ts->scale * std::tgamma(1.0 - ts->alpha) * std::pow(ts->theta + s, ts->alpha - 1.0);
  }
  return integrate([s](double x) { return x * std::exp(-s * x); }, 0.0, kInf).value;
}

double Measure1D::moment_below(double eps) const {
  if (!(eps > 0.0)) return 0.0;
  if (const auto* a = std::get_if<std::vector<Atom1D>>(&rep_)) {
    double m = 0.0;
    for (const auto& at : *a) {
      if (at.x <= eps) m += at.mass * at.x;
    }
    return m;
  }
  if (const auto* ts = std::get_if<TemperedStable>(&rep_)) {
    if (ts->scale == 0.0) return 0.0;
    const double e = 1.0 - ts->alpha;
    if (ts->theta == 0.0) return ts->scale * std::pow(eps, e) / e;
    return ts->scale * std::pow(ts->theta, -e) *
           boost::math::tgamma_lower(e, ts->theta * eps);
  }
  return integrate([](double x) { return x; }, 0.0, std::nextafter(eps, kInf)).value;
}

double Measure1D::first_moment() const {
  if (const auto* ts = std::get_if<TemperedStable>(&rep_)) {
    if (ts->scale == 0.0) return 0.0;
    if (ts->theta == 0.0) throw NumericError("first moment of an untempered stable measure diverges");
    return ts->scale * std::tgamma(1.0 - ts->alpha) * std::pow(ts->theta, ts->alpha - 1.0);
  }
  return integrate([](double x) { return x; }, 0.0, kInf).value;
}

double Measure1D::sample_above(double eps, RandomSource& rng) const {
  if (const auto* a = std::get_if<std::vector<Atom1D>>(&rep_)) {
    const double total = mass_above(eps);
    if (!(total > 0.0)) throw PreconditionError("no mass above the truncation level");
    double u = rng.uniform() * total;
    double last = 0.0;
    for (const auto& at : *a) {
      if (at.x <= eps || at.mass == 0.0) continue;
      last = at.x;
      u -= at.mass;
      if (u < 0.0) return at.x;
    }
    return last;
  }
  if (!(eps > 0.0)) throw UsageError("infinite-activity measure needs eps > 0");
  if (const auto* ts = std::get_if<TemperedStable>(&rep_)) {
    while (true) {
      const double x = eps * std::pow(rng.uniform(), -1.0 / ts->alpha);
      if (ts->theta == 0.0 || rng.uniform() < std::exp(-ts->theta * (x - eps))) return x;
    }
  }
  const auto& pd = std::get<PowerDensity>(rep_);
  while (true) {
    const double x = eps * std::pow(rng.uniform(), -1.0 / pd.alpha);
    const double env = pd.envelope * std::pow(x, -1.0 - pd.alpha);
    if (rng.uniform() * env < pd.density(x)) return x;
  }
}

double neutral_levy_marginal(double beta, double b, double c, double t) {
  if (!(t > 0.0)) throw UsageError("Levy density needs t > 0");
  if (beta == 2.0) {
    return std::exp(-c * c * t / (4.0 * b)) / (2.0 * std::sqrt(std::numbers::pi * t * t * t * b));
  }
  return std::pow(t, -1.0 - 1.0 / beta) *
         stable_density(StableParams{beta, b}, c * std::pow(t, 1.0 - 1.0 / beta));
}

namespace {

std::shared_ptr<const StableDensityTable> cached_density_table(const StableParams& sp) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, std::shared_ptr<const StableDensityTable>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{sp.beta, sp.b}];
  if (!slot) slot = std::make_shared<const StableDensityTable>(sp);
  return slot;
}

}  // namespace

Measure1D neutral_marginal_measure(const NeutralMutation& nm) {
  const StableParams sp{nm.beta, nm.b};
  sp.validate();
  if (!(nm.c >= 0.0)) throw UsageError("neutral family needs c >= 0");
  if (nm.beta == 2.0) {
    return Measure1D::tempered_stable(1.0 / (2.0 * std::sqrt(std::numbers::pi * nm.b)), 0.5,
                                      nm.c * nm.c / (4.0 * nm.b));
  }
  if (nm.c == 0.0) {
    return Measure1D::tempered_stable(stable_density_at_zero(sp), 1.0 / nm.beta, 0.0);
  }
  auto table = cached_density_table(sp);
  const double beta = nm.beta;
  const double c = nm.c;
  return Measure1D::power_density(
      [table, beta, c](double t) {
        return std::pow(t, -1.0 - 1.0 / beta) * (*table)(c * std::pow(t, 1.0 - 1.0 / beta));
      },
      1.0 / beta, table->max_value());
}

Measure1D one_type_marginal_measure(const OneTypeSibling& ot) {
  const StableParams sp{ot.beta, ot.b};
  sp.validate();
  return Measure1D::tempered_stable(stable_density_at_zero(sp), 1.0 / ot.beta, ot.b);
}

double one_type_psi0(double beta, double b, double r) {
  return b * (std::pow(r, beta) + 1.0 - std::pow(r + 1.0, beta));
}

std::string describe(const LevyMeasure2D& lambda) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const NeutralMutation& m) {
                   os << "neutral(beta=" << m.beta << ",b=" << m.b << ",c=" << m.c << ")";
                 },
                 [&](const OneTypeSibling& m) {
                   os << "one_type(beta=" << m.beta << ",b=" << m.b << ")";
                 },
                 [&](const Axes&) { os << "axes"; },
                 [&](const Diagonal&) { os << "diagonal"; },
                 [&](const AtomicMeasure& m) {
                   os << "atomic{";
                   for (std::size_t i = 0; i < m.atoms.size(); ++i) {
                     if (i) os << ",";
                     os << "(" << m.atoms[i].x1 << "," << m.atoms[i].x2 << "," << m.atoms[i].mass
                        << ")";
                   }
                   os << "}";
                 }},
             lambda);
  return os.str();
}

bool finite_activity(const LevyMeasure2D& lambda) {
  return std::visit(Overloaded{[](const NeutralMutation&) { return false; },
                               [](const OneTypeSibling&) { return false; },
                               [](const Axes& a) {
                                 return a.first.finite_activity() && a.second.finite_activity();
                               },
                               [](const Diagonal& d) { return d.marginal.finite_activity(); },
                               [](const AtomicMeasure&) { return true; }},
                    lambda);
}

namespace {

// int (1 - exp(-f(x) - s x)) mu(dx) and ds' * int x exp(-f(x) - s x) mu(dx),
// split at the breakpoints of f.
LaplaceIntegral line_integral(const Measure1D& mu, const TestFunction& f, double s,
                              double ds, const QuadratureSpec& spec) {
  LaplaceIntegral out;
  std::vector<double> cuts{0.0};
  std::vector<double> vals;
  for (std::size_t i = 0; i < f.breakpoints().size(); ++i) {
    cuts.push_back(f.breakpoints()[i]);
    vals.push_back(i == 0 ? 0.0 : f.values()[i - 1]);
  }
  cuts.push_back(kInf);
  vals.push_back(0.0);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double v = vals[k];
    if (v != 0.0 || s != 0.0) {
      const auto val = mu.integrate([v, s](double x) { return -std::expm1(-v - s * x); },
                                    cuts[k], cuts[k + 1], spec);
      out.value += val.value;
      out.error += val.error;
    }
    if (ds != 0.0) {
      const auto der = mu.integrate([v, s](double x) { return x * std::exp(-v - s * x); },
                                    cuts[k], cuts[k + 1], spec);
      out.derivative += ds * der.value;
    }
  }
  return out;
}

}  // namespace

LaplaceIntegral laplace_integral(const LevyMeasure2D& lambda, const TestFunction& f,
                                 double lam, const QuadratureSpec& spec) {
  return std::visit(
      Overloaded{
          [&](const NeutralMutation& m) {
            return line_integral(neutral_marginal_measure(m), f, m.c * lam, m.c, spec);
          },
          [&](const OneTypeSibling& m) {
            const double s = -one_type_psi0(m.beta, m.b, lam);
            const double ds =
                m.b * m.beta * (std::pow(lam + 1.0, m.beta - 1.0) - std::pow(lam, m.beta - 1.0));
            return line_integral(one_type_marginal_measure(m), f, s, ds, spec);
          },
          [&](const Axes& a) {
            LaplaceIntegral out;
            const auto& bp = f.breakpoints();
            for (std::size_t i = 0; i < f.values().size(); ++i) {
              const double v = f.values()[i];
              const auto r = a.first.integrate([v](double) { return -std::expm1(-v); }, bp[i],
                                               bp[i + 1], spec);
              out.value += r.value;
              out.error += r.error;
            }
            if (lam > 0.0 && !a.second.is_zero()) {
              const auto r =
                  a.second.integrate([lam](double x) { return -std::expm1(-lam * x); }, 0.0, kInf,
                                     spec);
              out.value += r.value;
              out.error += r.error;
            }
            if (!a.second.is_zero()) {
              out.derivative =
                  a.second.integrate([lam](double x) { return x * std::exp(-lam * x); }, 0.0, kInf,
                                     spec)
                      .value;
            }
            return out;
          },
          [&](const Diagonal& d) { return line_integral(d.marginal, f, lam, 1.0, spec); },
          [&](const AtomicMeasure& m) {
            LaplaceIntegral out;
            for (const auto& at : m.atoms) {
              const double e = f(at.x1) + lam * at.x2;
              out.value += at.mass * -std::expm1(-e);
              out.derivative += at.mass * at.x2 * std::exp(-e);
            }
            return out;
          }},
      lambda);
}

double second_moment_mass(const LevyMeasure2D& lambda) {
  auto moment = [](const Measure1D& mu) {
    const auto r = mu.integrate([](double x) { return x; }, 0.0, kInf);
    if (!std::isfinite(r.value)) throw NumericError("divergent second-coordinate moment");
    return r.value;
  };
  return std::visit(Overloaded{[&](const NeutralMutation& m) {
                                 if (m.c == 0.0) return 0.0;
                                 if (m.beta == 2.0) return m.c * moment(neutral_marginal_measure(m));
                                 // u = c t^{1-1/beta} turns c int t Lambda1(dt) into
                                 // beta/(beta-1) int_0^inf rho(u) du.
                                 const StableParams sp{m.beta, m.b};
                                 const auto r = integrate_to_infinity(
                                     [&](double u) { return stable_density(sp, u); }, 0.0);
                                 return m.beta / (m.beta - 1.0) * r.value;
                               },
                               [&](const OneTypeSibling& m) {
                                 return m.b * m.beta * moment(one_type_marginal_measure(m));
                               },
                               [&](const Axes& a) { return moment(a.second); },
                               [&](const Diagonal& d) { return moment(d.marginal); },
                               [](const AtomicMeasure& m) {
                                 double s = 0.0;
                                 for (const auto& at : m.atoms) s += at.mass * at.x2;
                                 return s;
                               }},
                    lambda);
}

MassCheck check_mass_condition(const LevyMeasure2D& lambda) {
  MassCheck out;
  out.value = second_moment_mass(lambda);
  out.pass = out.value <= 1.0 + 1e-9;
  return out;
}

}  // namespace colonist
