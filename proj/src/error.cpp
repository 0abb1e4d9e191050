#include <sca/error.hpp>

namespace sca {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::MalformedDocument:
        return "MalformedDocument";
    case ErrorCode::MissingId:
        return "MissingId";
    case ErrorCode::DuplicateAdvisory:
        return "DuplicateAdvisory";
    case ErrorCode::InvalidUrl:
        return "InvalidUrl";
    case ErrorCode::EmptyVersion:
        return "EmptyVersion";
    case ErrorCode::MalformedRange:
        return "MalformedRange";
    case ErrorCode::MalformedCoordinate:
        return "MalformedCoordinate";
    case ErrorCode::UnresolvableVersion:
        return "UnresolvableVersion";
    case ErrorCode::MissingProject:
        return "MissingProject";
    case ErrorCode::MalformedGraph:
        return "MalformedGraph";
    case ErrorCode::MalformedDiff:
        return "MalformedDiff";
    case ErrorCode::OverlappingSpans:
        return "OverlappingSpans";
    case ErrorCode::InvalidPatchContext:
        return "InvalidPatchContext";
    case ErrorCode::DuplicateCoordinate:
        return "DuplicateCoordinate";
    case ErrorCode::CorpusMismatch:
        return "CorpusMismatch";
    case ErrorCode::InvalidSpec:
        return "InvalidSpec";
    case ErrorCode::Io:
        return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message)
    , code_(code)
{
}

} // namespace sca
