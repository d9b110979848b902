#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace robcov {

// Invalid arguments are reported with std::invalid_argument. The types below
// cover failures that depend on the data rather than on the call site.

/// An eigensolver or factorization failed, or produced non-finite output.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The data cannot support the requested estimate (all-identical rows, zero
/// projected norm, zero trace, ...).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Bad experiment configuration (unknown key, unparsable value, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace robcov
