#pragma once

#include <sca/advisory.hpp>
#include <sca/callgraph.hpp>
#include <sca/dependency.hpp>
#include <sca/patch.hpp>
#include <sca/reachability.hpp>
#include <sca/report.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sca {

struct WorkspacePaths {
    std::filesystem::path registry;
    std::filesystem::path advisories;
    std::optional<std::filesystem::path> graphs;
    std::optional<std::filesystem::path> patches;

    /// registry/, advisories/, graphs/ and patches/ below one corpus directory.
    static WorkspacePaths corpus(const std::filesystem::path& dir);
};

/// Everything an analysis reads. Immutable once loaded.
struct Workspace {
    Registry registry;
    AdvisoryCollection advisories;
    GraphStore graphs;
    std::vector<PatchManifest> patches;

    static Workspace load(const WorkspacePaths& paths);
};

struct MarkReport {
    VulnerabilityMarks marks;
    std::vector<std::string> warnings;
};

/// Locates the vulnerable callables of every patch manifest and propagates
/// them to the affected releases that keep the same signature.
MarkReport build_vulnerability_marks(const Workspace& ws);

/// Roots listed one coordinate per line; blank lines and '#' comments skipped.
std::vector<Coordinate> read_roots(const std::filesystem::path& file);

class Analyzer {
public:
    explicit Analyzer(const Workspace& ws, ResolveOptions options = {});

    const VulnerabilityMarks& marks() const noexcept { return marks_.marks; }
    const std::vector<std::string>& mark_warnings() const noexcept { return marks_.warnings; }

    /// Throws Error{MissingProject} or Error{UnresolvableVersion} from resolution.
    RootVerdict analyze(const Coordinate& root, const AnalysisSetting& setting, RunDiagnostics* diagnostics = nullptr) const;
    RootVerdict analyze(const DependencyGraph& resolved, const AnalysisSetting& setting,
                        RunDiagnostics* diagnostics = nullptr) const;

    /// Whole-program graph of the root and its dependencies within k, with
    /// vulnerability marks applied.
    WholeProgramGraph whole_program(const DependencyGraph& resolved, Depth k, RunDiagnostics* diagnostics = nullptr) const;

    /// Throws std::invalid_argument unless k_values is strictly ascending.
    std::vector<SweepEntry> depth_sweep(const Coordinate& root, std::span<const Depth> k_values, Granularity granularity,
                                        RunDiagnostics* diagnostics = nullptr) const;

    /// Verdicts ordered by root coordinate whatever the worker count. Roots
    /// that fail to resolve are counted in diagnostics and left out.
    CorpusResult run_corpus(std::span<const Coordinate> roots, const AnalysisSetting& setting, unsigned workers,
                            Timestamp created_at) const;
    SweepRun run_sweep(std::span<const Coordinate> roots, std::span<const Depth> k_values, Granularity granularity,
                       unsigned workers, Timestamp created_at) const;

private:
    const Workspace& ws_;
    ResolveOptions options_;
    MarkReport marks_;
};

} // namespace sca
