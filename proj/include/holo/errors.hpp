#pragma once

#include <stdexcept>
#include <string>

namespace holo {

// Inputs with incompatible or unsupported shapes.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Scalar parameters outside their admissible range.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Arguments outside the mathematical domain of a function (e.g. arcsin > 1).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Non-finite values appearing during a computation.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config validation failure tied to a specific key.
struct ValidationError : std::invalid_argument {
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(what), field(std::move(field)) {}
  std::string field;
};

// Corrupt or truncated persisted data.
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedVersionError : IntegrityError {
  using IntegrityError::IntegrityError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace holo
