#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "colonist/numerics.hpp"
#include "colonist/random.hpp"
#include "colonist/stable.hpp"
#include "colonist/test_function.hpp"

namespace colonist {

struct Atom1D {
  double x = 1.0;
  double mass = 1.0;
};

/// scale * x^(-1-alpha) * exp(-theta x) dx on (0, inf), alpha in (0, 1).
struct TemperedStable {
  double scale = 1.0;
  double alpha = 0.5;
  double theta = 0.0;
};

/// General density on (0, inf) dominated by envelope * x^(-1-alpha).
struct PowerDensity {
  std::function<double(double)> density;
  double alpha = 0.5;
  double envelope = 1.0;
};

/// One-dimensional sigma-finite measure on (0, inf).
class Measure1D {
 public:
  using Rep = std::variant<std::vector<Atom1D>, TemperedStable, PowerDensity>;

  Measure1D() : rep_(std::vector<Atom1D>{}) {}
  static Measure1D atoms(std::vector<Atom1D> atoms);
  static Measure1D tempered_stable(double scale, double alpha, double theta);
  static Measure1D power_density(std::function<double(double)> density, double alpha,
                                 double envelope);

  const Rep& rep() const noexcept { return rep_; }
  bool finite_activity() const noexcept;
  bool is_zero() const noexcept;

  /// int_{[lo, hi)} g d(mu); hi may be +infinity, lo may be 0.
  QuadratureResult integrate(const RealFn& g, double lo, double hi,
                             const QuadratureSpec& spec = {}) const;
  /// mu((eps, inf)).
  double mass_above(double eps) const;
  /// int (1 - e^{-s x}) mu(dx), closed form where one exists.
  double exponent(double s) const;
  /// int x e^{-s x} mu(dx).
  double exponent_derivative(double s) const;
  /// int_{(0, eps]} x mu(dx).
  double moment_below(double eps) const;
  /// int x mu(dx); throws NumericError if divergent.
  double first_moment() const;
  /// One draw from mu restricted to (eps, inf), normalised.
  double sample_above(double eps, RandomSource& rng) const;

 private:
  explicit Measure1D(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

/// Neutral mutations: Lambda^(1)(dt) = t^(-1-1/beta) rho(c t^(1-1/beta)) dt
/// carried by the line x2 = c x1.
struct NeutralMutation {
  double beta = 2.0;
  double b = 1.0;
  double c = 1.0;
};

/// One-type siblings: Lambda^(1)(dt) = rho(0) t^(-1-1/beta) e^{-b t} dt, and
/// given x1 = t the second coordinate is X^m_t, the subordinator with
/// E exp(-r X^m_t) = exp(t b (r^beta + 1 - (r+1)^beta)).
struct OneTypeSibling {
  double beta = 2.0;
  double b = 1.0;
};

/// Support on the two axes: first (x1, 0), second (0, x2).
struct Axes {
  Measure1D first;
  Measure1D second;
};

/// Support on the diagonal x1 = x2.
struct Diagonal {
  Measure1D marginal;
};

struct Atom2D {
  double x1 = 0.0;
  double x2 = 0.0;
  double mass = 0.0;
};

struct AtomicMeasure {
  std::vector<Atom2D> atoms;
};

using LevyMeasure2D =
    std::variant<NeutralMutation, OneTypeSibling, Axes, Diagonal, AtomicMeasure>;

std::string describe(const LevyMeasure2D& lambda);
bool finite_activity(const LevyMeasure2D& lambda);

/// Density of Lambda^(1) for the neutral family at t > 0.
double neutral_levy_marginal(double beta, double b, double c, double t);

/// Lambda^(1) as a Measure1D for the neutral and one-type families.
Measure1D neutral_marginal_measure(const NeutralMutation& nm);
Measure1D one_type_marginal_measure(const OneTypeSibling& ot);

/// Psi_0(r) = b (r^beta + 1 - (r+1)^beta) <= 0, exponent of X^m.
double one_type_psi0(double beta, double b, double r);

/// int (1 - exp(-f(x1) - lambda x2)) Lambda(dx1 dx2) and its lambda-derivative,
/// by quadrature on each piece of f.
struct LaplaceIntegral {
  double value = 0.0;
  double derivative = 0.0;
  double error = 0.0;
};
LaplaceIntegral laplace_integral(const LevyMeasure2D& lambda, const TestFunction& f,
                                 double lam, const QuadratureSpec& spec = {});

/// int x2 Lambda(dx1 dx2).
double second_moment_mass(const LevyMeasure2D& lambda);

struct MassCheck {
  double value = 0.0;
  bool pass = false;
};
MassCheck check_mass_condition(const LevyMeasure2D& lambda);

}  // namespace colonist
