#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace colonist {

/// One verdict of a statistical or numerical check.
/// pass <=> |estimate - target| <= tolerance.
struct StatTestResult {
  std::string name;
  double estimate = 0.0;
  double target = 0.0;
  double std_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double runtime_seconds = 0.0;
  bool inconclusive = false;
  std::string detail;

  static StatTestResult compare(std::string name, double estimate, double target,
                                double std_error, double tolerance);
  /// Fixed key order: name, estimate, target, stderr, tolerance, pass
  /// [, runtime], detail.
  std::string to_jsonl(bool with_runtime = false) const;
  /// "PASS name: ..." / "FAIL name: ..."
  std::string summary_line() const;
};

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double critical_value = 0.0;  // at the requested significance
  std::size_t cells = 0;        // after merging
};

/// Two-sample chi-square homogeneity test on aligned histograms. Adjacent
/// cells are merged until each merged cell holds at least `min_count`
/// observations in total.
ChiSquareResult chi_square_two_sample(std::span<const double> a, std::span<const double> b,
                                      double significance = 0.01, double min_count = 10.0);

/// Goodness of fit of observed counts to cell probabilities.
ChiSquareResult chi_square_goodness(std::span<const double> observed,
                                    std::span<const double> probabilities,
                                    double significance = 0.01, double min_expected = 5.0);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double critical_value = 0.0;
  double effective_n = 0.0;
};

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

/// One-sample KS test; +infinity entries are right-censored observations
/// beyond every finite value.
KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf,
                       double significance = 0.01);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                       double significance = 0.01);

/// z with P(|Z| > z) = family_alpha / tests.
double bonferroni_z(double family_alpha, std::size_t tests);

/// Lag-1 sample autocorrelation.
double lag1_autocorrelation(std::span<const double> x);

}  // namespace colonist
