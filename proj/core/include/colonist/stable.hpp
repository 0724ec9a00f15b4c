#pragma once

#include <memory>
#include <vector>

namespace colonist {

/// Spectrally positive stable law with E exp(-q X_t) = exp(t b q^beta).
/// For beta = 2 this is the centred Gaussian with variance 2b.
struct StableParams {
  double beta = 2.0;
  double b = 1.0;

  void validate() const;
};

/// Density of X_1. Closed form for beta = 2, otherwise a contour integral of
/// the analytically continued Laplace transform (absolute accuracy ~1e-10).
double stable_density(const StableParams& p, double x);

/// Same integral evaluated for any beta in (1, 2], including 2; used to
/// validate the contour method against the Gaussian.
double stable_density_contour(const StableParams& p, double x);

/// rho(0) = Gamma(1 + 1/beta) b^(-1/beta) sin(pi/beta) / pi.
double stable_density_at_zero(const StableParams& p);

/// Constant K of the Levy measure K x^(-1-beta) dx, chosen so that
/// int (e^{-qx} - 1 + qx) K x^(-1-beta) dx = b q^beta. Zero for beta = 2.
double stable_levy_constant(const StableParams& p);

/// Cached cubic-spline table of rho on [0, infinity) for repeated evaluation,
/// with the K x^(-1-beta) power tail beyond the grid.
class StableDensityTable {
 public:
  explicit StableDensityTable(const StableParams& p, double x_max = 60.0,
                              int points = 3001);
  double operator()(double x) const;
  double max_value() const noexcept { return max_; }

 private:
  struct Spline;
  StableParams p_;
  double x_max_;
  double max_ = 0.0;
  double edge_ = 0.0;
  std::shared_ptr<const Spline> spline_;
};

}  // namespace colonist
