#pragma once

#include <stdexcept>
#include <string>

namespace ef {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a parameter does not hold.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Not enough samples, events or pairs to compute the requested quantity.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

/// An estimator ran but could not produce a trustworthy value.
class EstimationError : public Error {
 public:
  EstimationError(const std::string& what, std::string diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A random source ran out of bits. Sources never recycle data.
class ExhaustedError : public Error {
 public:
  using Error::Error;
};

/// Structural validation of an input object failed (graph, ranking, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ef
