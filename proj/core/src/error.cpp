#include "friedrichs/error.hpp"

namespace friedrichs {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_resolution: return "invalid-resolution";
    case ErrorCode::degenerate_domain: return "degenerate-domain";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::zero_function: return "zero-function";
    case ErrorCode::mismatched_grid: return "mismatched-grid";
    case ErrorCode::degenerate_base: return "degenerate-base";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::bracket_failure: return "bracket-failure";
    case ErrorCode::singular_mass: return "singular-M";
    case ErrorCode::zero_after_projection: return "zero-after-projection";
    case ErrorCode::invalid_exponents: return "invalid-exponents";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::empty_batch: return "empty-batch";
    case ErrorCode::all_collinear_batch: return "all-collinear-batch";
    case ErrorCode::parse_error: return "parse-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace friedrichs
