#include "kspg/errors.hpp"

namespace kspg {

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const PreconditionViolation*>(&e)) return "precondition_violation";
  if (dynamic_cast<const NoActionsAvailable*>(&e)) return "no_actions_available";
  if (dynamic_cast<const NumericalFailure*>(&e)) return "numerical_failure";
  if (dynamic_cast<const MissingReconstruction*>(&e)) return "missing_reconstruction";
  if (dynamic_cast<const DegenerateVariance*>(&e)) return "degenerate_variance";
  if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const IoError*>(&e)) return "io_error";
  return "internal";
}

}  // namespace kspg
