#include "colonist/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "colonist/error.hpp"

namespace colonist {

namespace bq = boost::math::quadrature;

namespace {

void check(const QuadratureResult& r, double l1, const QuadratureSpec& spec,
           const char* what) {
  if (!std::isfinite(r.value)) throw NumericError(std::string(what) + ": non-finite integral");
  const double allowed = std::max(spec.abs_tol, spec.rel_tol * std::max(l1, std::abs(r.value)));
  // Estimates from the double-exponential rules are conservative; only
  // flag results that are clearly unconverged.
  if (r.error > 1e3 * allowed) {
    throw NumericError(std::string(what) + ": quadrature did not converge (error " +
                       std::to_string(r.error) + ")");
  }
}

}  // namespace

QuadratureResult integrate(const RealFn& f, double lo, double hi,
                           const QuadratureSpec& spec) {
  QuadratureResult r;
  if (!(hi > lo)) return r;
  double l1 = 0.0;
  r.value = bq::gauss_kronrod<double, 31>::integrate(f, lo, hi, spec.max_depth,
                                                     spec.rel_tol, &r.error, &l1);
  check(r, l1, spec, "integrate");
  return r;
}

QuadratureResult integrate_singular(const RealFn& f, double lo, double hi,
                                    const QuadratureSpec& spec) {
  QuadratureResult r;
  if (!(hi > lo)) return r;
  thread_local bq::tanh_sinh<double> ts(15);
  double l1 = 0.0;
  std::size_t levels = 0;
  // Nodes closer to lo than this would overflow power-law integrands.
  const double floor = lo + 1e-150 * std::max(1.0, std::abs(lo));
  auto g = [&](double x, double xc) {
    // xc = lo - x on the left half (negative), hi - x on the right half.
    const double at = xc < 0.0 ? lo - xc : x;
    return f(std::max(at, floor));
  };
  r.value = ts.integrate(g, lo, hi, spec.rel_tol, &r.error, &l1, &levels);
  check(r, l1, spec, "integrate_singular");
  return r;
}

QuadratureResult integrate_to_infinity(const RealFn& f, double lo,
                                       const QuadratureSpec& spec) {
  thread_local bq::exp_sinh<double> es(9);
  const double split = lo + 1.0;
  QuadratureResult head = integrate_singular(f, lo, split, spec);
  QuadratureResult tail;
  double l1 = 0.0;
  std::size_t levels = 0;
  tail.value = es.integrate(f, split, std::numeric_limits<double>::infinity(),
                            spec.rel_tol, &tail.error, &l1, &levels);
  check(tail, l1, spec, "integrate_to_infinity");
  return {head.value + tail.value, head.error + tail.error};
}

RootResult solve_bracketed(const RealFn& F, const RealFn& dF, double lo, double hi,
                           std::optional<double> start, const RootOptions& opts) {
  RootResult r;
  double f_lo = F(lo);
  double f_hi = F(hi);
  if (f_lo > 0.0 || f_hi <= 0.0) {
    if (f_lo == 0.0 || f_hi == 0.0) {
      r.root = (f_lo == 0.0) ? lo : hi;
      r.lo = r.hi = r.root;
      return r;
    }
    throw DegenerateInput("root bracket has no sign change");
  }
  double x = start.value_or(0.5 * (lo + hi));
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  double fx = F(x);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    r.iterations = it;
    if (fx == 0.0) {
      lo = hi = x;
      break;
    }
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double tol = opts.abs_tol + opts.rel_tol * std::abs(x);
    double next = 0.5 * (lo + hi);
    bool newton = false;
    if (dF) {
      const double d = dF(x);
      if (d > 0.0 && std::isfinite(d)) {
        const double cand = x - fx / d;
        if (cand > lo && cand < hi) {
          next = cand;
          newton = true;
        }
      }
    }
    if (newton && std::abs(next - x) <= 0.5 * tol) {
      x = next;
      fx = F(x);
      break;
    }
    if (hi - lo <= tol) {
      x = std::abs(F(lo)) < std::abs(F(hi)) ? lo : hi;
      fx = F(x);
      break;
    }
    x = next;
    fx = F(x);
    if (it == opts.max_iterations) {
      throw ConvergenceError("root finder hit its iteration limit");
    }
  }
  r.root = x;
  r.residual = fx;
  r.lo = std::min(lo, x);
  r.hi = std::max(hi, x);
  return r;
}

double find_upper_bracket(const RealFn& F, double initial, double limit) {
  double hi = initial > 0.0 ? initial : 1.0;
  while (!(F(hi) > 0.0)) {
    hi *= 2.0;
    if (hi > limit) throw DegenerateInput("no sign change found while bracketing root");
  }
  return hi;
}

}  // namespace colonist
