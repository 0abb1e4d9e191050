#pragma once

#include <sca/advisory.hpp>
#include <sca/callgraph.hpp>
#include <sca/coordinate.hpp>
#include <sca/dependency.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sca {

enum class Granularity { PackageLevel, MethodLevel };

std::string_view to_string(Granularity g);
/// "package" or "method".
Granularity parse_granularity(std::string_view text);

struct AnalysisSetting {
    Granularity granularity = Granularity::PackageLevel;
    Depth depth = Depth::max();

    /// D_p(1), D_m(max), ...
    std::string label() const;

    friend bool operator==(const AnalysisSetting&, const AnalysisSetting&) = default;
};

struct ChainStep {
    Coordinate coordinate;
    std::string signature;

    friend bool operator==(const ChainStep&, const ChainStep&) = default;
};

/// Root-package callable first, vulnerable callable last.
struct VulnerableCallChain {
    std::string advisory_id;
    std::vector<ChainStep> path;

    std::size_t length() const noexcept { return path.empty() ? 0 : path.size() - 1; }
    friend bool operator==(const VulnerableCallChain&, const VulnerableCallChain&) = default;
};

struct Finding {
    std::string advisory_id;
    Coordinate coordinate; // package that carries the vulnerability
    std::optional<VulnerableCallChain> chain; // method level only

    friend bool operator==(const Finding&, const Finding&) = default;
};

struct RootVerdict {
    Coordinate root;
    AnalysisSetting setting;
    bool vulnerable = false;
    std::vector<Finding> findings; // by advisory id, then coordinate, then chain target

    /// Distinct advisory ids among the findings, ascending.
    std::vector<std::string> advisory_ids() const;

    friend bool operator==(const RootVerdict&, const RootVerdict&) = default;
};

/// Presence check: one finding per (advisory, dependency) pair among the
/// dependencies within depth k.
RootVerdict analyze_package_level(const DependencyGraph& g, const AdvisoryCollection& kb, Depth k);

/// Multi-source BFS from every root-package node, expanding neighbours in
/// ascending global id order. One shortest chain per (advisory, vulnerable
/// node) reachable from the root; vulnerable nodes of the root package itself
/// are not findings.
RootVerdict analyze_method_level(const WholeProgramGraph& whole, Depth k);

struct SweepEntry {
    Depth depth = Depth::max();
    RootVerdict verdict;
    /// Distinct advisories found with every dependency up to this depth.
    std::size_t cumulative_advisories = 0;
    /// Advisories found at this entry but not at the previous one, i.e. those
    /// whose nearest reachable occurrence sits exactly at this level when the
    /// sweep steps by one.
    std::size_t exact_level_advisories = 0;
    /// Maximum dependency depth of the root's resolved graph.
    int root_max_depth = 0;
};

struct CoverageRow {
    Depth depth = Depth::max();
    std::size_t vulnerable_roots = 0;
    std::optional<double> ratio; // nullopt when no root is vulnerable at max
};

/// |D(k)| / |D(max)| for every depth present in the sweeps. Throws
/// std::invalid_argument when a root lacks its max entry.
std::vector<CoverageRow> coverage_curve(const std::map<std::string, std::vector<SweepEntry>>& corpus);

} // namespace sca
