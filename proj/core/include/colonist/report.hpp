#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "colonist/stats.hpp"

namespace colonist {

/// RFC 4180 CSV: header row first, CRLF line endings, fields quoted only
/// when they contain a comma, quote or line break.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields) {
    row(std::span<const std::string>(fields.begin(), fields.size()));
  }
  std::size_t columns() const noexcept { return columns_; }

  static std::string quote(const std::string& field);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

/// Shortest decimal form that round-trips, so outputs are byte-identical
/// across runs.
std::string format_number(double x);
std::string format_number(std::uint64_t x);

/// One StatTestResult per line.
class JsonlWriter {
 public:
  explicit JsonlWriter(std::ostream& out, bool with_runtime = false)
      : out_(out), with_runtime_(with_runtime) {}
  void write(const StatTestResult& r) { out_ << r.to_jsonl(with_runtime_) << '\n'; }
  void write_raw(const std::string& line) { out_ << line << '\n'; }

 private:
  std::ostream& out_;
  bool with_runtime_;
};

}  // namespace colonist
