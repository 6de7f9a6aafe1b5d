#pragma once

#include <stdexcept>
#include <string>

namespace periodica {

// Domain errors carry a stable code so the CLI can map them to exit
// status 3 and serialize a structured payload.
enum class ErrorCode {
    tiling_failed,
    core_too_small,
    not_invertible,
    separation_violation,
    budget_exhausted,
    pipeline_infeasible,
    no_convergence,
    refine_inverse,
    unachievable_tolerance,
    infinite_fixed_set,
    insufficient_window,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::tiling_failed: return "tiling_failed";
        case ErrorCode::core_too_small: return "core_too_small";
        case ErrorCode::not_invertible: return "not_invertible";
        case ErrorCode::separation_violation: return "separation_violation";
        case ErrorCode::budget_exhausted: return "budget_exhausted";
        case ErrorCode::pipeline_infeasible: return "pipeline_infeasible";
        case ErrorCode::no_convergence: return "no_convergence";
        case ErrorCode::refine_inverse: return "refine_inverse";
        case ErrorCode::unachievable_tolerance: return "unachievable_tolerance";
        case ErrorCode::infinite_fixed_set: return "infinite_fixed_set";
        case ErrorCode::insufficient_window: return "insufficient_window";
    }
    return "unknown";
}

class DomainError : public std::runtime_error {
  public:
    DomainError(ErrorCode code, const std::string& what,
                std::string detail = {})
        : std::runtime_error(what), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

  private:
    ErrorCode code_;
    std::string detail_;  // JSON payload, optional
};

// Violated invariant inside the library itself (exit status 4).
class InternalError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

// Bad user-facing configuration (exit status 2).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace periodica
