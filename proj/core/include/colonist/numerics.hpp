#pragma once

#include <functional>
#include <optional>

namespace colonist {

struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  unsigned max_depth = 18;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

using RealFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on a finite interval.
QuadratureResult integrate(const RealFn& f, double lo, double hi,
                           const QuadratureSpec& spec = {});

/// Integral over (lo, infinity). Integrable endpoint singularities at `lo`
/// are handled by a tanh-sinh panel on (lo, lo + 1], the tail by exp-sinh.
QuadratureResult integrate_to_infinity(const RealFn& f, double lo,
                                       const QuadratureSpec& spec = {});

/// Integral over (lo, hi] where the integrand may blow up at lo.
QuadratureResult integrate_singular(const RealFn& f, double lo, double hi,
                                    const QuadratureSpec& spec = {});

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
};

struct RootOptions {
  double abs_tol = 1e-12;
  double rel_tol = 0.0;
  int max_iterations = 200;
};

/// Root of an increasing-through-zero function on [lo, hi] with F(lo) <= 0
/// < F(hi): Newton steps from `start`, falling back to bisection whenever a
/// step leaves the bracket. `dF` may be empty (pure bisection).
/// Throws ConvergenceError when the tolerance is not met.
RootResult solve_bracketed(const RealFn& F, const RealFn& dF, double lo, double hi,
                           std::optional<double> start = std::nullopt,
                           const RootOptions& opts = {});

/// Doubles `hi` (starting from `initial`) until F(hi) > 0. Throws
/// DegenerateInput if no sign change appears below `limit`.
double find_upper_bracket(const RealFn& F, double initial, double limit = 1e300);

}  // namespace colonist
