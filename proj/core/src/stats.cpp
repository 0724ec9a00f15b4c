#include "colonist/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "colonist/error.hpp"

namespace colonist {

StatTestResult StatTestResult::compare(std::string name, double estimate, double target,
                                       double std_error, double tolerance) {
  StatTestResult r;
  r.name = std::move(name);
  r.estimate = estimate;
  r.target = target;
  r.std_error = std_error;
  r.tolerance = tolerance;
  r.pass = std::abs(estimate - target) <= tolerance;
  return r;
}

std::string StatTestResult::to_jsonl(bool with_runtime) const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["estimate"] = estimate;
  j["target"] = target;
  j["stderr"] = std_error;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  if (with_runtime) j["runtime"] = runtime_seconds;
  if (inconclusive) j["inconclusive"] = true;
  if (!detail.empty()) j["detail"] = detail;
  return j.dump();
}

std::string StatTestResult::summary_line() const {
  std::ostringstream os;
  os << (pass ? "PASS " : "FAIL ") << name << ": estimate=" << estimate << " target=" << target
     << " |diff|=" << std::abs(estimate - target) << " tol=" << tolerance;
  if (inconclusive) os << " (inconclusive)";
  if (!detail.empty()) os << " [" << detail << "]";
  return os.str();
}

namespace {

double chi2_quantile(int dof, double significance) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, significance));
}

}  // namespace

ChiSquareResult chi_square_two_sample(std::span<const double> a, std::span<const double> b,
                                      double significance, double min_count) {
  if (a.size() != b.size()) throw UsageError("histograms must be aligned");
  std::vector<double> ma;
  std::vector<double> mb;
  double acc_a = 0.0;
  double acc_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc_a += a[i];
    acc_b += b[i];
    if (acc_a + acc_b >= min_count) {
      ma.push_back(acc_a);
      mb.push_back(acc_b);
      acc_a = acc_b = 0.0;
    }
  }
  if (acc_a + acc_b > 0.0) {
    if (ma.empty()) {
      ma.push_back(0.0);
      mb.push_back(0.0);
    }
    ma.back() += acc_a;
    mb.back() += acc_b;
  }
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    na += ma[i];
    nb += mb[i];
  }
  ChiSquareResult r;
  r.cells = ma.size();
  if (ma.size() < 2 || na == 0.0 || nb == 0.0) {
    r.dof = 0;
    r.p_value = 1.0;
    return r;
  }
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const double d = ka * ma[i] - kb * mb[i];
    r.statistic += d * d / (ma[i] + mb[i]);
  }
  r.dof = static_cast<int>(ma.size()) - 1;
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  r.critical_value = chi2_quantile(r.dof, significance);
  return r;
}

ChiSquareResult chi_square_goodness(std::span<const double> observed,
                                    std::span<const double> probabilities, double significance,
                                    double min_expected) {
  if (observed.size() != probabilities.size()) throw UsageError("cells must be aligned");
  double n = 0.0;
  for (double o : observed) n += o;
  std::vector<double> mo;
  std::vector<double> me;
  double acc_o = 0.0;
  double acc_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_o += observed[i];
    acc_e += probabilities[i] * n;
    if (acc_e >= min_expected) {
      mo.push_back(acc_o);
      me.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (mo.empty()) {
      mo.push_back(0.0);
      me.push_back(0.0);
    }
    mo.back() += acc_o;
    me.back() += acc_e;
  }
  ChiSquareResult r;
  r.cells = mo.size();
  if (mo.size() < 2) return r;
  for (std::size_t i = 0; i < mo.size(); ++i) {
    const double d = mo[i] - me[i];
    r.statistic += d * d / me[i];
  }
  r.dof = static_cast<int>(mo.size()) - 1;
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  r.critical_value = chi2_quantile(r.dof, significance);
  return r;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Jacobi-theta form converges fast for small x.
    const double pi = 3.14159265358979323846;
    const double y = std::exp(-pi * pi / (8.0 * x * x));
    double s = 0.0;
    for (int k = 1; k < 50; k += 2) s += std::pow(y, k * k);
    return 1.0 - std::sqrt(2.0 * pi) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

namespace {

double kolmogorov_quantile(double significance) {
  double lo = 0.1;
  double hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_survival(mid) > significance) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

KsResult ks_finish(double d, double ne, double significance) {
  KsResult r;
  r.statistic = d;
  r.effective_n = ne;
  const double sq = std::sqrt(ne);
  const double scale = sq + 0.12 + 0.11 / sq;
  r.p_value = kolmogorov_survival(scale * d);
  r.critical_value = kolmogorov_quantile(significance) / scale;
  return r;
}

}  // namespace

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf,
                       double significance) {
  if (samples.empty()) throw UsageError("KS test needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = std::isinf(samples[i]) ? 1.0 : cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return ks_finish(d, n, significance);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double significance) {
  if (a.empty() || b.empty()) throw UsageError("KS test needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return ks_finish(d, na * nb / (na + nb), significance);
}

double bonferroni_z(double family_alpha, std::size_t tests) {
  const double per = family_alpha / static_cast<double>(std::max<std::size_t>(1, tests));
  boost::math::normal z;
  return boost::math::quantile(boost::math::complement(z, per / 2.0));
}

double lag1_autocorrelation(std::span<const double> x) {
  if (x.size() < 3) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    den += d * d;
    if (i + 1 < x.size()) num += d * (x[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace colonist
