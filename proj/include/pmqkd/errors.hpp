#pragma once

#include <stdexcept>
#include <string>

namespace pmqkd {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Statistics requested from a dataset with no usable events.
class NoDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or missing command-line / configuration value. The message starts
// with the offending field name.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pmqkd
