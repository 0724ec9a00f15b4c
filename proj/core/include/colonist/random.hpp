#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace colonist {

/// Explicit source of randomness. Every sampler takes one of these by
/// reference; there is no global generator anywhere in the library.
class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  /// Stream for replica `replica` of experiment `experiment` under a master
  /// seed. Streams are derived by hashing the triple, so adding experiments
  /// or replicas never perturbs existing ones.
  static RandomSource for_stream(std::uint64_t master, std::uint64_t experiment,
                                 std::uint64_t replica);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Derived seed for (master, experiment, replica).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t experiment,
                          std::uint64_t replica);

/// Stable 64-bit identifier for a named experiment (FNV-1a).
std::uint64_t experiment_id(std::string_view name);

}  // namespace colonist
