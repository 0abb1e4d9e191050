#pragma once

#include <sca/version.hpp>

#include <string>
#include <string_view>

namespace sca {

/// group:artifact:version. Identity and ordering follow the rendered string,
/// so "g:a:1.0" and "g:a:1.0.0" are distinct artifacts.
struct Coordinate {
    std::string group;
    std::string artifact;
    PackageVersion version;

    /// Throws Error{MalformedCoordinate} unless the text has exactly two
    /// colons and three non-empty parts.
    static Coordinate parse(std::string_view text);

    std::string project_id() const { return group + ":" + artifact; }
    std::string to_string() const { return group + ":" + artifact + ":" + version.original(); }

    friend bool operator==(const Coordinate& a, const Coordinate& b) { return a.to_string() == b.to_string(); }
    friend bool operator<(const Coordinate& a, const Coordinate& b) { return a.to_string() < b.to_string(); }
};

} // namespace sca
