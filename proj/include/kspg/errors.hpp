#pragma once

#include <stdexcept>
#include <string>

namespace kspg {

// Each error carries a short machine-readable kind used by the CLI error record.

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct NoActionsAvailable : std::logic_error {
  using std::logic_error::logic_error;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingReconstruction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateVariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Kind tag for an in-flight exception ("invalid_argument", "io", ...).
std::string error_kind(const std::exception& e);

}  // namespace kspg
