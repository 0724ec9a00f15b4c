#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace colonist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or configuration supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A simulation ran past its step budget. The partial counters describe how
// far it got, which is usually enough to tell a heavy tail from a bug.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::uint64_t steps,
                 std::uint64_t completed_units)
      : Error(what + " (steps=" + std::to_string(steps) +
              ", completed=" + std::to_string(completed_units) + ")"),
        steps_(steps),
        completed_units_(completed_units) {}

  std::uint64_t steps() const noexcept { return steps_; }
  std::uint64_t completed_units() const noexcept { return completed_units_; }

 private:
  std::uint64_t steps_;
  std::uint64_t completed_units_;
};

// Root bracket could not be formed because the equation has no admissible
// solution for the given input.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Quadrature or special-function evaluation failed.
class NumericError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace colonist
