#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sca {

enum class ErrorCode {
    MalformedDocument,
    MissingId,
    DuplicateAdvisory,
    InvalidUrl,
    EmptyVersion,
    MalformedRange,
    MalformedCoordinate,
    UnresolvableVersion,
    MissingProject,
    MalformedGraph,
    MalformedDiff,
    OverlappingSpans,
    InvalidPatchContext,
    DuplicateCoordinate,
    CorpusMismatch,
    InvalidSpec,
    Io,
};

std::string_view to_string(ErrorCode code);

// Every failure the engine reports carries one of the codes above so callers
// (and the CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sca
