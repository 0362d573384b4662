#pragma once

#include <stdexcept>
#include <string>

namespace statbeam {

/// Argument outside the mathematical domain of a function (e.g. exp_e1(0)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition on the inputs does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matrix has an eigenvalue below the PSD tolerance.
class NotPsdError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Covariance too ill-conditioned for the two-user closed forms.
class SingularCovarianceError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class DimensionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A stored invariant (e.g. Cauchy-Schwarz for link statistics) is violated.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The high-SNR asymptote diverges (no interference at the user).
class UnboundedRateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed scenario or matrix document; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace statbeam
