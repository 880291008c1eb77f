#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cqnls {

enum class ErrorKind {
  invalid_argument,
  invalid_field,
  out_of_range,
  no_convergence,
  invalid_profile,
  precondition_violated,
  insufficient_data,
  spectral_failure,
  singular_shift,
  ill_conditioned,
  no_decomposition,
  io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit code for the CLI: 2 bad input, 3 numerical failure, 4 I/O.
int exit_code(ErrorKind kind);

}  // namespace cqnls
