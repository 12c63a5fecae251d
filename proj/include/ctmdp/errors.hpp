#pragma once

#include <stdexcept>
#include <string>

namespace ctmdp {

// Numeric values match ctmdp_status in ctmdp.h.
enum class ErrorCode {
  malformed_model = 1,
  index_out_of_range = 2,
  grid_mismatch = 3,
  stability_violation = 4,
  non_finite_value = 5,
  time_out_of_range = 6,
  invalid_envelope = 7,
  missing_lyapunov = 8,
  complexity_budget_exceeded = 9,
  invalid_argument = 10,
  parse_error = 11,
  io_error = 12,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ctmdp
