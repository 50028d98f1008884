#include "d4c/error.hpp"

namespace d4c {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ManifestMissing: return "ManifestMissing";
        case ErrorCode::ManifestMalformed: return "ManifestMalformed";
        case ErrorCode::SourceFileMissing: return "SourceFileMissing";
        case ErrorCode::FunctionNotFound: return "FunctionNotFound";
        case ErrorCode::UnbalancedDelimiters: return "UnbalancedDelimiters";
        case ErrorCode::MissingHunks: return "MissingHunks";
        case ErrorCode::OverlappingHunks: return "OverlappingHunks";
        case ErrorCode::HunkOutOfRange: return "HunkOutOfRange";
        case ErrorCode::FormatMismatch: return "FormatMismatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::AuthError: return "AuthError";
        case ErrorCode::ResponseMalformed: return "ResponseMalformed";
        case ErrorCode::CapabilityUnsupported: return "CapabilityUnsupported";
        case ErrorCode::EmptyScores: return "EmptyScores";
        case ErrorCode::ScriptMalformed: return "ScriptMalformed";
        case ErrorCode::NoFunctionFound: return "NoFunctionFound";
        case ErrorCode::AmbiguousWithoutName: return "AmbiguousWithoutName";
        case ErrorCode::NoHunksFound: return "NoHunksFound";
        case ErrorCode::SpanInvalid: return "SpanInvalid";
        case ErrorCode::AnchorNotFound: return "AnchorNotFound";
        case ErrorCode::AnchorAmbiguous: return "AnchorAmbiguous";
        case ErrorCode::AnchorOverlap: return "AnchorOverlap";
        case ErrorCode::SandboxSetupFailed: return "SandboxSetupFailed";
        case ErrorCode::RunLogMalformed: return "RunLogMalformed";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace d4c
