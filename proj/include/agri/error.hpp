#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agri {

enum class ErrorCode {
    MalformedConfig,
    InvariantViolation,
    IoFailure,
    FingerprintMismatch,
    UnknownResource,
    DoubleCommit,
    NotAnAbs,
    IncompleteRun,
    CalledOnSafeAction,
    InvalidParams,
    VersionMismatch,
    InfeasibleSchedule,
    BudgetExceeded,
    InvalidRange,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

} // namespace agri
