#pragma once

#include <stdexcept>
#include <string>

namespace bnp {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry, resolution or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller handed an operation an argument outside its domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Boundary data violates g >= 0, g not identically zero.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// (lambda, mu) outside the range where the fibering analysis applies.
class AdmissibilityError : public Error {
 public:
  AdmissibilityError(const std::string& what, double value = 0.0)
      : Error(what), value_(value) {}
  /// The offending quantity (t0 numerator, T'(t0), ...).
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Operation called outside its documented regime (e.g. lambda >= lambda1).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A report was asked for without the records it summarises.
class IncompleteInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace bnp
