#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace friedrichs {

enum class ErrorCode {
  invalid_resolution,
  degenerate_domain,
  length_mismatch,
  zero_function,
  mismatched_grid,
  degenerate_base,
  no_convergence,
  bracket_failure,
  singular_mass,
  zero_after_projection,
  invalid_exponents,
  invalid_argument,
  empty_batch,
  all_collinear_batch,
  parse_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace friedrichs
