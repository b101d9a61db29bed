#include "agri/error.hpp"

namespace agri {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::MalformedConfig: return "MalformedConfig";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::UnknownResource: return "UnknownResource";
    case ErrorCode::DoubleCommit: return "DoubleCommit";
    case ErrorCode::NotAnAbs: return "NotAnAbs";
    case ErrorCode::IncompleteRun: return "IncompleteRun";
    case ErrorCode::CalledOnSafeAction: return "CalledOnSafeAction";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::InfeasibleSchedule: return "InfeasibleSchedule";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidRange: return "InvalidRange";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
{
}

void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}

} // namespace agri
