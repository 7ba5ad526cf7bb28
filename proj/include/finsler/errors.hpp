#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A jet primitive was evaluated outside its domain (log of a non-positive value, ...).
class JetDomainError : public Error {
 public:
  explicit JetDomainError(const std::string& primitive)
      : Error("jet domain violation in primitive '" + primitive + "'"), primitive_(primitive) {}
  const std::string& primitive() const noexcept { return primitive_; }

 private:
  std::string primitive_;
};

class DegenerateDirectionError : public Error {
 public:
  DegenerateDirectionError() : Error("degenerate direction: y = 0") {}
};

class ConvexityViolationError : public Error {
 public:
  using Error::Error;
};

class InversionFailureError : public Error {
 public:
  InversionFailureError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Evaluation point left the coordinate chart.
class ChartBoundaryError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied parameter (N < n, negative radius, unknown zoo name, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a comparison function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class StiffnessError : public Error {
 public:
  using Error::Error;
};

/// A conjugate point was found before the first output time.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class PastCutError : public Error {
 public:
  using Error::Error;
};

/// A verifier was invoked without the hypothesis certificate it needs, or the
/// certificate does not cover the requested bound.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class HorizonError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler
