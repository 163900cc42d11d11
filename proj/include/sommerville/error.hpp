#pragma once

#include <stdexcept>
#include <string>

namespace sommerville {

enum class ErrorCode {
  invalid_dimension,
  invalid_scale,
  invalid_parameter,
  invalid_window,
  invalid_base,
  invalid_permutation,
  dimension_mismatch,
  arithmetic_overflow,
  degenerate_cell,
  budget_exceeded,
  unsupported_export,
  parse_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::invalid_scale: return "invalid-scale";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::invalid_window: return "invalid-window";
    case ErrorCode::invalid_base: return "invalid-base";
    case ErrorCode::invalid_permutation: return "invalid-permutation";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::arithmetic_overflow: return "arithmetic-overflow";
    case ErrorCode::degenerate_cell: return "degenerate-cell";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::unsupported_export: return "unsupported-export";
    case ErrorCode::parse_error: return "parse-error";
  }
  return "unknown";
}

// All library failures are reported through this type; code() lets callers
// branch without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sommerville
