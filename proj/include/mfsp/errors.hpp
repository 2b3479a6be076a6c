#pragma once

#include <stdexcept>
#include <string>

namespace mfsp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments violate a documented precondition such as a shape or ordering.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Data is well-formed but carries no usable information (e.g. all-zero snapshots).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// A factorization or rank-one update lost positive definiteness.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

/// File contents could not be parsed. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mfsp
