#pragma once

#include <stdexcept>
#include <string>

namespace akcy {

// Failure categories surfaced by the library. Iterative-solver outcomes that
// callers consume routinely (Newton divergence, step underflow) are reported
// through result structs instead; these codes are for contract violations and
// unrecoverable states.
enum class ErrorCode {
    InvalidField,
    GridMismatch,
    NotSolvable,
    NotClosed,
    NotCompatible,
    NotPositive,
    NotInvariant,
    PairingBroken,
    FrameDegenerate,
    NoConvergence,
    NotTaming,
    ObstructionNonzero,
    IoError,
    FormatError,
    ParseError,
    ValidationError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidField: return "InvalidField";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::NotSolvable: return "NotSolvable";
        case ErrorCode::NotClosed: return "NotClosed";
        case ErrorCode::NotCompatible: return "NotCompatible";
        case ErrorCode::NotPositive: return "NotPositive";
        case ErrorCode::NotInvariant: return "NotInvariant";
        case ErrorCode::PairingBroken: return "PairingBroken";
        case ErrorCode::FrameDegenerate: return "FrameDegenerate";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotTaming: return "NotTaming";
        case ErrorCode::ObstructionNonzero: return "ObstructionNonzero";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace akcy
