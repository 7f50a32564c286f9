#pragma once

#include <stdexcept>
#include <string>

namespace ias {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  not_hermitian,
  propagation,
  numerical,
  io,
};

/// Exception type used throughout the core. The C API maps `kind` onto its
/// status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the adaptive integrator cannot continue; carries the time at
/// which the step size collapsed.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, double failed_at)
      : Error(ErrorKind::propagation, what), failed_at_(failed_at) {}

  double failed_at() const noexcept { return failed_at_; }

 private:
  double failed_at_;
};

}  // namespace ias
