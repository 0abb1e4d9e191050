#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

namespace sca {

struct CorpusSpec {
    std::uint64_t seed = 0;
    int project_count = 120;
    int max_releases = 4;
    int max_direct_deps = 3;
    int max_depth_target = 6;
    double vulnerability_rate = 0.2;
    double call_density = 0.5;
    int root_count = 200;

    /// Throws Error{InvalidSpec}.
    void validate() const;
};

struct GeneratedCorpus {
    std::size_t projects = 0;
    std::size_t releases = 0;
    std::size_t advisories = 0;
    std::size_t roots = 0;
};

/// Writes registry/, graphs/, advisories/ (OSV), patches/<id>/ and roots.txt
/// below `out`, which must be absent or empty. Identical specs give
/// byte-identical trees. Throws Error{InvalidSpec} or Error{Io}.
GeneratedCorpus generate(const CorpusSpec& spec, const std::filesystem::path& out);

/// A:1.0 -> B:1.0 -> C:1.0 with A.Main() -> A.Foo() -> B.Bar() -> C.Zeta(),
/// Zeta vulnerable in C 1.0 and patched in C 1.1.
GeneratedCorpus generate_figure1(const std::filesystem::path& out);

} // namespace sca
