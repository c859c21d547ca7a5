#pragma once

#include <stdexcept>
#include <string>

namespace rcheb {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (e.g. |s| >= 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested moment has no supported closed form or quadrature route.
class UnsupportedMomentError : public Error {
 public:
  using Error::Error;
};

/// A moment overflowed double precision; carries the failing order.
class MomentOverflowError : public Error {
 public:
  MomentOverflowError(const std::string& what, int order) : Error(what), order_(order) {}
  int order() const noexcept { return order_; }

 private:
  int order_;
};

/// A moment table does not cover a required order.
class OrderError : public Error {
 public:
  using Error::Error;
};

/// A series failed to reach tolerance before the term cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling exceeded its attempt cap.
class SamplingStallError : public Error {
 public:
  using Error::Error;
};

/// Invalid run or simulation configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed distribution/grid/config-file text.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcheb
