#pragma once

#include <stdexcept>
#include <string>

namespace gridcurio {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside of its contract.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// NaN/inf encountered in a loss, logit or gradient.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The remote embedding service could not be reached after retries.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace gridcurio
