#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "colonist/error.hpp"
#include "colonist/levy_measure.hpp"
#include "colonist/random.hpp"
#include "colonist/replicas.hpp"
#include "colonist/stats.hpp"
#include "colonist/test_function.hpp"

namespace colonist {

/// One realisation of the limit measure M_y.
struct PointMeasureSample {
  std::vector<double> atoms;  // retained first-coordinate marks
  double sigma_y = 0.0;
  double y = 0.0;
  double eps = 0.0;
  double bias_bound = 0.0;

  /// {"y":..,"sigma_y":..,"atoms":[..],"eps":..,"bias_bound":..}
  std::string to_json() const;
};

/// One mark of the Poisson measure: first coordinate 0 means a jump of Y
/// that is not an atom of M_y.
struct Mark {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Samples the Poisson construction of M_y: marks with intensity
/// dt (x) Lambda restricted to x1 > eps (x2 > eps for axis-two marks), in
/// time order. The second coordinate of the discarded small marks is
/// replaced by its mean, so between marks t - Y_t rises with slope 1 - d
/// and sigma_y is found exactly inside the gap.
class LimitMeasureSampler {
 public:
  LimitMeasureSampler(LevyMeasure2D lambda, double eps = 1e-6, double kernel_eps = 1e-4);

  double rate() const noexcept { return rate_; }
  /// d = int over discarded marks of x2.
  double drift() const noexcept { return drift_; }
  double eps() const noexcept { return eps_; }
  const LevyMeasure2D& measure() const noexcept { return lambda_; }

  Mark draw_mark(RandomSource& rng) const;

  /// y * (d + max f * Lambda1([u0, eps])): bound on the error in
  /// -ln E exp(-<M_y, f>) due to truncation.
  double bias_bound(double y, const TestFunction& f) const;

  /// Runs until sigma_y, calling visit(x1) for each retained atom; visit may
  /// return false to stop early. Returns sigma_y, or NaN if stopped.
  template <class Visitor>
  double run(double y, RandomSource& rng, Visitor&& visit) const {
    if (!(y > 0.0)) throw UsageError("y must be positive");
    const double slope = 1.0 - drift_;
    double t = 0.0;
    double level = 0.0;
    while (true) {
      const double gap = rate_ > 0.0 ? rng.exponential(rate_)
                                     : std::numeric_limits<double>::infinity();
      if (level + slope * gap >= y) return t + (y - level) / slope;
      t += gap;
      level += slope * gap;
      const Mark m = draw_mark(rng);
      level -= m.x2;
      if (m.x1 > 0.0 && !visit(m.x1)) return std::numeric_limits<double>::quiet_NaN();
    }
  }

  /// Runs until sigma_y or until time `horizon`, whichever is first.
  /// Returns (sigma_y or +inf, atom count up to that time).
  std::pair<double, std::size_t> run_until(double y, double horizon, RandomSource& rng) const;

  PointMeasureSample sample(double y, RandomSource& rng) const;

  /// Y_t, compensated the same way (unbiased for E Y_t).
  double sample_Y(double t, RandomSource& rng) const;

  /// (atoms with x1 > 0, Y_t) of the unstopped Poisson measure at time t.
  std::pair<std::size_t, double> sample_unstopped(double t, RandomSource& rng) const;

 private:
  LevyMeasure2D lambda_;
  double eps_;
  double kernel_eps_;
  double rate_ = 0.0;
  double drift_ = 0.0;
  // Axes: probability that a mark comes from the first axis.
  double first_share_ = 1.0;
  Measure1D first_;
  Measure1D second_;
  double first_eps_ = 0.0;
  double second_eps_ = 0.0;
  std::vector<double> atom_cdf_;
};

PointMeasureSample sample_limit_measure(const LevyMeasure2D& lambda, double y, double eps,
                                        RandomSource& rng);

/// Laplace functionals E exp(-<M_y, f_i>) from independent replicas.
std::vector<LaplaceEstimate> limit_laplace_estimates(const LimitMeasureSampler& sampler,
                                                     double y,
                                                     std::span<const TestFunction> fs,
                                                     const ReplicaPlan& plan);

/// X^m_{x1}: subordinator with Levy measure (1 - e^{-x}) nu(dx), nu the
/// stable measure; jumps above eps are simulated, smaller ones replaced by
/// their mean. For beta = 2 it is the pure drift 2 b x1.
double one_type_kernel_sample(double beta, double b, double x1, double eps, RandomSource& rng);

/// int_{(0, eps)} x (1 - e^{-x}) nu(dx).
double one_type_kernel_bias(double beta, double b, double eps);

struct BallotOptions {
  std::vector<double> y_edges{0.5, 1.0, 1.5, 2.0, 2.5};
  std::vector<double> t_edges{0.5, 1.5, 2.5, 3.5, 4.5};
  std::size_t count_classes = 4;  // 0, 1, ..., classes-2, and "at least classes-1"
  std::size_t replicas = 1'000'000;
  double family_sigma = 3.0;
  double min_hits = 10.0;
};

struct BallotCell {
  std::size_t count_class = 0;
  std::size_t t_bin = 0;
  std::size_t y_bin = 0;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double z = 0.0;
  bool informative = false;
};

struct BallotReport {
  std::vector<BallotCell> cells;
  double max_abs_z = 0.0;
  double threshold = 0.0;
  std::size_t informative = 0;
  StatTestResult result;
};

/// Monte Carlo check of the ballot identity
///   P(M_y in A, sigma_y in dt) dy = (y/t) P(N1_t in A, t - Y_t in dy) dt
/// integrated over cells (atom-count class x t bin x y bin). The left side
/// draws y uniformly over the y range; the right side draws t uniformly over
/// the t range and weights by (t - Y_t)/t.
BallotReport ballot_identity_check(const LevyMeasure2D& lambda, const BallotOptions& opts,
                                   std::uint64_t seed, unsigned threads = 1);

/// Cut-off regime: the stable process is split jump by jump into
/// X^h (jumps min(J,1)) and X^m (jumps (J-1)^+); jumps below eps are
/// compensated. Returns (T_x, Y_x) with T_x the first passage of X^h at -x
/// and Y_x = X^m at that time.
struct CutoffPassage {
  double T = 0.0;
  double Y = 0.0;
};
CutoffPassage cutoff_passage_sample(double beta, double b, double x, double eps,
                                    RandomSource& rng);

}  // namespace colonist
