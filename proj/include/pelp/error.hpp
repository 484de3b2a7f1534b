#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pelp {

/// Base class for every failure raised by the toolkit. The CLI maps each
/// subclass to its own process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user configuration: missing column, out-of-range hyper-parameter,
/// invalid split fraction.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. Carries the 1-based line number when one applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A caller broke a documented precondition (e.g. comparing unaligned
/// matrices, feeding out-of-vocabulary token ids).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf appeared in a loss, gradient or parameter.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pelp
