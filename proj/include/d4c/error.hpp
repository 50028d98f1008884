#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace d4c {

enum class ErrorCode {
    // bug-model
    ManifestMissing,
    ManifestMalformed,
    SourceFileMissing,
    FunctionNotFound,
    UnbalancedDelimiters,
    // report-builder
    MissingHunks,
    OverlappingHunks,
    HunkOutOfRange,
    FormatMismatch,
    // model-backend
    InvalidConfig,
    BackendUnavailable,
    AuthError,
    ResponseMalformed,
    CapabilityUnsupported,
    EmptyScores,
    ScriptMalformed,
    // patch-engine
    NoFunctionFound,
    AmbiguousWithoutName,
    NoHunksFound,
    SpanInvalid,
    AnchorNotFound,
    AnchorAmbiguous,
    AnchorOverlap,
    // repair-orchestrator
    SandboxSetupFailed,
    RunLogMalformed,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the harness carries one ErrorCode.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace d4c
