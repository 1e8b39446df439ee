#pragma once

#include <stdexcept>
#include <string>

namespace grade2 {

/// Invalid sizes, parameters or configuration documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization or Gram matrix failed its conditioning check.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched field or coefficient lengths.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite Galerkin state after a time step.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Every path of an ensemble terminated early.
class EnsembleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grade2
