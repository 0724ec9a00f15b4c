#include "colonist/stable.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "colonist/error.hpp"

namespace colonist {

using std::numbers::pi;

void StableParams::validate() const {
  if (!(beta > 1.0 && beta <= 2.0)) throw UsageError("stable index must lie in (1, 2]");
  if (!(b > 0.0) || !std::isfinite(b)) throw UsageError("stable scale b must be positive");
}

double stable_density_contour(const StableParams& p, double x) {
  p.validate();
  // Rays s e^{+-i theta} along which both x z and b z^beta have negative
  // real part; the Bromwich line can be rotated onto them.
  const double theta = x >= 0.0 ? 0.5 * (pi / 2 + 1.5 * pi / p.beta)
                                 : 0.5 * (pi / (2 * p.beta) + pi / 2);
  const std::complex<double> dir = std::polar(1.0, theta);
  const std::complex<double> dir_beta = std::polar(p.b, p.beta * theta);
  auto integrand = [&](double s) {
    if (s == 0.0) return dir.imag();
    const std::complex<double> e = x * s * dir + std::pow(s, p.beta) * dir_beta;
    if (e.real() < -745.0) return 0.0;
    return (std::exp(e) * dir).imag();
  };
  thread_local boost::math::quadrature::exp_sinh<double> es(9);
  double err = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  const double v = es.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(),
                                1e-12, &err, &l1, &levels);
  if (!std::isfinite(v) || err > 1e-8 * std::max(1.0, l1)) {
    throw NumericError("stable density inversion did not converge");
  }
  return std::max(0.0, v / pi);
}

namespace {

// rho(x) ~ -sum_n b^n sin(pi n beta) Gamma(1 + n beta) / (pi n!) x^{-1-n beta},
// asymptotic as x -> inf. NaN when the smallest term is not negligible.
double stable_density_tail_series(const StableParams& p, double x) {
  const double w = p.b * std::pow(x, -p.beta);
  double sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  double log_w_pow = 0.0;
  for (int n = 1; n <= 40; ++n) {
    log_w_pow += std::log(w);
    const double nb = n * p.beta;
    const double mag = std::exp(std::lgamma(1.0 + nb) - std::lgamma(n + 1.0) + log_w_pow);
    if (mag > previous) break;
    sum -= std::sin(pi * nb) * mag;
    previous = mag;
    if (mag < 1e-17 * std::abs(sum)) break;
  }
  if (!(previous < 1e-14 * std::abs(sum))) return std::numeric_limits<double>::quiet_NaN();
  return std::max(0.0, sum / (pi * x));
}

}  // namespace

double stable_density(const StableParams& p, double x) {
  p.validate();
  if (p.beta == 2.0) {
    return std::exp(-x * x / (4.0 * p.b)) / (2.0 * std::sqrt(pi * p.b));
  }
  if (x > 0.0 && p.b * std::pow(x, -p.beta) <= 0.02) {
    const double v = stable_density_tail_series(p, x);
    if (!std::isnan(v)) return v;
  }
  if (x < 0.0) {
    // Saddle-point exponent of the left tail; beyond it rho underflows.
    const double q = std::pow(-x / (p.b * p.beta), 1.0 / (p.beta - 1.0));
    if ((p.beta - 1.0) * p.b * std::pow(q, p.beta) > 740.0) return 0.0;
  }
  return stable_density_contour(p, x);
}

double stable_density_at_zero(const StableParams& p) {
  p.validate();
  const double a = 1.0 / p.beta;
  return std::tgamma(1.0 + a) * std::pow(p.b, -a) * std::sin(pi * a) / pi;
}

double stable_levy_constant(const StableParams& p) {
  p.validate();
  if (p.beta == 2.0) return 0.0;
  return p.b * p.beta * (p.beta - 1.0) / std::tgamma(2.0 - p.beta);
}

struct StableDensityTable::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> s;
};

StableDensityTable::StableDensityTable(const StableParams& p, double x_max, int points)
    : p_(p), x_max_(x_max) {
  p.validate();
  if (points < 8 || !(x_max > 0.0)) throw UsageError("density table needs a real grid");
  std::vector<double> v(static_cast<std::size_t>(points));
  const double h = x_max / (points - 1);
  for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = stable_density(p, i * h);
  max_ = *std::max_element(v.begin(), v.end());
  edge_ = v.back();
  spline_ = std::make_shared<const Spline>(
      Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(v.begin(), v.end(),
                                                                        0.0, h)});
}

double StableDensityTable::operator()(double x) const {
  if (x < 0.0) return stable_density(p_, x);
  if (x >= x_max_) return edge_ * std::pow(x / x_max_, -1.0 - p_.beta);
  return std::max(0.0, spline_->s(x));
}

}  // namespace colonist
