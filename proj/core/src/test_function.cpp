#include "colonist/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "colonist/error.hpp"

namespace colonist {

TestFunction::TestFunction(std::vector<double> breakpoints,
                           std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.empty() && values_.empty()) return;
  if (breakpoints_.size() != values_.size() + 1) {
    throw UsageError("test function needs one more breakpoint than values");
  }
  if (!(breakpoints_.front() > 0.0)) {
    throw UsageError("test function support must start above 0");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1]) || !std::isfinite(breakpoints_[i])) {
      throw UsageError("test function breakpoints must be finite and increasing");
    }
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw UsageError("test function values must be finite and >= 0");
    }
  }
}

TestFunction TestFunction::window(double lo, double hi, double theta) {
  return TestFunction({lo, hi}, {theta});
}

double TestFunction::operator()(double x) const {
  if (values_.empty() || x < breakpoints_.front() || x >= breakpoints_.back()) {
    return 0.0;
  }
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

bool TestFunction::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double TestFunction::max_value() const noexcept {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double TestFunction::support_lo() const noexcept {
  return breakpoints_.empty() ? 0.0 : breakpoints_.front();
}

double TestFunction::support_hi() const noexcept {
  return breakpoints_.empty() ? 0.0 : breakpoints_.back();
}

TestFunction TestFunction::rescaled(double scale) const {
  if (!(scale > 0.0)) throw UsageError("rescaling factor must be positive");
  TestFunction out = *this;
  for (double& u : out.breakpoints_) u *= scale;
  return out;
}

TestFunction TestFunction::operator+(const TestFunction& other) const {
  if (values_.empty()) return other;
  if (other.values_.empty()) return *this;
  std::vector<double> grid = breakpoints_;
  grid.insert(grid.end(), other.breakpoints_.begin(), other.breakpoints_.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> vals;
  vals.reserve(grid.size() - 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    vals.push_back((*this)(grid[i]) + other(grid[i]));
  }
  return TestFunction(std::move(grid), std::move(vals));
}

std::string TestFunction::describe() const {
  if (values_.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) os << " + ";
    os << values_[i] << "*1[" << breakpoints_[i] << "," << breakpoints_[i + 1] << ")";
  }
  return os.str();
}

}  // namespace colonist
