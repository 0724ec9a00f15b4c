#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "colonist/levy_measure.hpp"
#include "colonist/numerics.hpp"
#include "colonist/test_function.hpp"
#include "colonist/walk_rep.hpp"

namespace colonist {

struct CumulantResult {
  double value = 0.0;
  double residual = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
  double stderr_propagated = 0.0;  // Monte Carlo-backed solves only
  double quadrature_error = 0.0;   // quadrature-backed solves only

  /// {"value":..,"residual":..,"iterations":..,"stderr":..}
  std::string to_json() const;
};

/// Psi(q, r) = b q^beta + c q - c r.
struct StablePlusDrift {
  double b = 1.0;
  double beta = 2.0;
  double c = 1.0;
};

/// Psi(q, r) = b((q+1)^beta - 1) + b(r^beta + 1 - (r+1)^beta).
struct OneTypeExponent {
  double b = 1.0;
  double beta = 2.0;
};

/// Psi sampled on a rectangular (q, r) grid, bilinear in between.
struct TabulatedExponent {
  std::vector<double> q_grid;
  std::vector<double> r_grid;
  std::vector<double> values;  // row-major: values[i * r_grid.size() + j] = Psi(q_i, r_j)

  static TabulatedExponent from_function(const std::function<double(double, double)>& psi,
                                         std::vector<double> q_grid,
                                         std::vector<double> r_grid);
  double operator()(double q, double r) const;
};

using LaplaceExponent = std::variant<StablePlusDrift, OneTypeExponent, TabulatedExponent>;

double evaluate_psi(const LaplaceExponent& psi, double q, double r);

/// Psi(q, q) >= 0 and Psi(0, r) <= 0 on the given grid.
bool exponent_sign_conditions(const LaplaceExponent& psi, std::span<const double> grid);

/// Tabulated exponent of the cut-off pair (X^h, X^m): jumps of the stable
/// process are split as (min(x,1), (x-1)^+),
/// Psi(q, r) = int (exp(-q min(x,1) - r (x-1)^+) - 1 + q x) nu(dx).
TabulatedExponent cutoff_exponent(double beta, double b, std::vector<double> q_grid,
                                  std::vector<double> r_grid);

/// lambda >= 0 with exp(-lambda) = mean(exp(-f(C/scale) - lambda M)) over
/// the samples; standard error by the delta method.
CumulantResult solve_K_empirical(std::span<const PassagePair> samples,
                                 const TestFunction& f, double scale = 1.0);

/// lambda >= 0 with lambda = int (1 - exp(-f(x1) - lambda x2)) Lambda(dx1 dx2).
CumulantResult solve_kappa(const LevyMeasure2D& lambda, const TestFunction& f,
                           const QuadratureSpec& quad = {});

/// z >= 0 with Psi(z, r) = q (the largest such root).
double invert_psi(const LaplaceExponent& psi, double q, double r);

/// Nonnegative root of b z^beta + c z = q.
double phi_neutral(double b, double beta, double c, double q);

/// Axes case: phi(int (1 - e^{-f}) dLambda1) with phi solving
/// q = phi - int (1 - e^{-phi x}) Lambda2(dx).
double kappa_axes(const Measure1D& first, const Measure1D& second, const TestFunction& f);

}  // namespace colonist
