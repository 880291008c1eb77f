#include "cqnls/error.hpp"

namespace cqnls {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_field: return "invalid-field";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::no_convergence: return "no-convergence";
    case ErrorKind::invalid_profile: return "invalid-profile";
    case ErrorKind::precondition_violated: return "precondition-violated";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::spectral_failure: return "spectral-failure";
    case ErrorKind::singular_shift: return "singular-shift";
    case ErrorKind::ill_conditioned: return "ill-conditioned";
    case ErrorKind::no_decomposition: return "no-decomposition";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
    case ErrorKind::invalid_field:
    case ErrorKind::out_of_range:
    case ErrorKind::invalid_profile:
    case ErrorKind::precondition_violated:
    case ErrorKind::insufficient_data:
      return 2;
    case ErrorKind::io:
      return 4;
    default:
      return 3;
  }
}

}  // namespace cqnls
