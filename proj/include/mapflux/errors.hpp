#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mapflux {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input or violated precondition (CLI exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Query outside the domain of a path or time change (CLI exit code 1).
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf, overflow or exhausted step-halving during simulation (CLI exit code 2).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A coefficient was requested too close to (or beyond) a singular wall.
/// `value` is the offending coordinate or root pairing, `root` the index of
/// the positive root involved (or the coordinate index for the Bessel arc).
class WallError : public Error {
 public:
  WallError(const std::string& what, double value, std::size_t root)
      : Error(what), value_(value), root_(root) {}

  double value() const noexcept { return value_; }
  std::size_t root() const noexcept { return root_; }

 private:
  double value_;
  std::size_t root_;
};

}  // namespace mapflux
