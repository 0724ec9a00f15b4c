#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "colonist/random.hpp"
#include "colonist/test_function.hpp"

namespace colonist {

/// How a batch of independent replicas is seeded and scheduled.
struct ReplicaPlan {
  std::uint64_t seed = 20100801;
  std::uint64_t experiment = 0;
  std::size_t replicas = 1000;
  unsigned threads = 1;
};

/// Thread count from COLONIST_THREADS, else hardware concurrency.
unsigned default_thread_count();

/// Runs fn(rng, r) for r in [0, replicas) on `threads` workers. Replica r
/// always gets stream (seed, experiment, r) and its result lands at index r,
/// so the output is identical for every thread count.
template <class T, class Fn>
std::vector<T> run_replicas(const ReplicaPlan& plan, Fn&& fn) {
  std::vector<T> out(plan.replicas);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(plan.threads, static_cast<unsigned>(plan.replicas)));
  auto body = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      RandomSource rng = RandomSource::for_stream(plan.seed, plan.experiment, r);
      out[r] = fn(rng, r);
    }
  };
  if (workers <= 1) {
    body(0, plan.replicas);
    return out;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (plan.replicas + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(plan.replicas, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Monte Carlo mean with its standard error.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

MeanEstimate mean_with_stderr(std::span<const double> values);

/// Estimate of E exp(-<P, f>) from independent replicas.
struct LaplaceEstimate {
  double estimate = 1.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  /// Replicas stopped early because <P, f> already exceeded the saturation
  /// level; each contributes at most exp(-saturation) of bias.
  std::size_t saturated = 0;
  double saturation_bias = 0.0;

  /// -ln(estimate) with delta-method standard error.
  double cumulant() const { return -std::log(estimate); }
  double cumulant_stderr() const { return std_error / estimate; }
};

/// Partial sums below this are tracked exactly; once every test function
/// has accumulated this much, exp(-sum) < 5e-18 and the replica stops.
inline constexpr double kSaturationLevel = 40.0;

/// Accumulates <P, f_i> over a stream of atoms for several test functions.
class FunctionalAccumulator {
 public:
  explicit FunctionalAccumulator(std::span<const TestFunction> fs)
      : fs_(fs), sums_(fs.size(), 0.0) {}

  /// Adds one atom; returns false once every sum is saturated.
  bool add(double x) {
    bool open = false;
    for (std::size_t i = 0; i < fs_.size(); ++i) {
      sums_[i] += fs_[i](x);
      open = open || (sums_[i] < kSaturationLevel && !fs_[i].is_zero());
    }
    return open;
  }
  bool saturated() const {
    for (std::size_t i = 0; i < fs_.size(); ++i)
      if (sums_[i] < kSaturationLevel && !fs_[i].is_zero()) return false;
    return true;
  }
  const std::vector<double>& sums() const { return sums_; }

 private:
  std::span<const TestFunction> fs_;
  std::vector<double> sums_;
};

/// Laplace functionals of a random point measure for several test
/// functions at once. `source(rng, visit)` must feed atoms to `visit`
/// (a bool(double) callable) until the measure is exhausted or visit returns
/// false.
template <class Source>
std::vector<LaplaceEstimate> estimate_laplace(Source&& source,
                                              std::span<const TestFunction> fs,
                                              const ReplicaPlan& plan) {
  struct Row {
    std::vector<double> sums;
    bool stopped = false;
  };
  // Zero functions have Laplace functional exactly 1; the point measure
  // itself need not be generated.
  if (std::all_of(fs.begin(), fs.end(), [](const TestFunction& f) { return f.is_zero(); })) {
    std::vector<LaplaceEstimate> out(fs.size());
    for (auto& e : out) {
      e.estimate = 1.0;
      e.replicas = plan.replicas;
    }
    return out;
  }
  auto rows = run_replicas<Row>(plan, [&](RandomSource& rng, std::size_t) {
    FunctionalAccumulator acc(fs);
    bool stopped = false;
    source(rng, [&](double x) {
      if (!acc.add(x)) {
        stopped = true;
        return false;
      }
      return true;
    });
    return Row{acc.sums(), stopped};
  });
  std::vector<LaplaceEstimate> out(fs.size());
  std::vector<double> values(rows.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::size_t saturated = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      values[r] = std::exp(-rows[r].sums[i]);
      if (rows[r].stopped) ++saturated;
    }
    const MeanEstimate m = mean_with_stderr(values);
    out[i].estimate = m.mean;
    out[i].std_error = m.std_error;
    out[i].replicas = rows.size();
    out[i].saturated = saturated;
    out[i].saturation_bias =
        rows.empty() || fs[i].is_zero() ? 0.0
                     : static_cast<double>(saturated) / static_cast<double>(rows.size()) *
                           std::exp(-kSaturationLevel);
  }
  return out;
}

}  // namespace colonist
