#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perimeter_phase {

enum class ErrorCode {
  domain,
  resolution,
  unsupported_region,
  invalid_pair,
  infeasible,
  budget_exceeded,
  divergence,
  numeric,
  internal,
  config,
  io,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain: return "domain_error";
    case ErrorCode::resolution: return "resolution_error";
    case ErrorCode::unsupported_region: return "unsupported_region";
    case ErrorCode::invalid_pair: return "invalid_pair";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::numeric: return "numeric_error";
    case ErrorCode::internal: return "internal_error";
    case ErrorCode::config: return "config_error";
    case ErrorCode::io: return "io_error";
  }
  return "unknown";
}

/// Base for every error raised by the library. The code is stable and
/// machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

/// Raised when a glue or barrier contract is violated; carries the measured excess.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& message, double excess)
      : Error(ErrorCode::budget_exceeded, message), excess_(excess) {}
  double excess() const noexcept { return excess_; }

 private:
  double excess_;
};

/// Raised when the saturation precondition of the gluing fails.
class InfeasibleGlue : public Error {
 public:
  InfeasibleGlue(const std::string& message, double minimal_delta)
      : Error(ErrorCode::infeasible, message), minimal_delta_(minimal_delta) {}
  /// Smallest band width for which the saturation holds, NaN if none exists.
  double minimal_delta() const noexcept { return minimal_delta_; }

 private:
  double minimal_delta_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace perimeter_phase
