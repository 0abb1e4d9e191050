#pragma once

#include <sca/advisory.hpp>
#include <sca/dependency.hpp>
#include <sca/reachability.hpp>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sca {

using Timestamp = std::chrono::sys_seconds;

/// 2024-01-31T12:00:00Z
std::string format_timestamp(Timestamp t);
/// Throws Error{MalformedDocument}.
Timestamp parse_timestamp(std::string_view text);

/// SOURCE_DATE_EPOCH when set, otherwise the current time.
Timestamp default_created_at();

struct RunDiagnostics {
    std::size_t unresolved_calls = 0;
    std::size_t skipped_packages = 0; // dependencies without a call graph
    std::size_t unmatched_marks = 0;
    std::size_t failed_roots = 0;     // roots that could not be resolved

    RunDiagnostics& operator+=(const RunDiagnostics& o);
    friend bool operator==(const RunDiagnostics&, const RunDiagnostics&) = default;
};

struct CorpusResult {
    Timestamp created_at {};
    AnalysisSetting setting;
    std::vector<RootVerdict> verdicts; // ascending by root coordinate, unique
    RunDiagnostics diagnostics;

    friend bool operator==(const CorpusResult&, const CorpusResult&) = default;
};

enum class ExportFormat { Json, Tsv, HumanTable };

ExportFormat parse_export_format(std::string_view text);

std::string export_result(const CorpusResult& result, ExportFormat format);
/// One verdict: the JSON object used inside results, or a readable listing of
/// its findings and chains.
std::string export_verdict(const RootVerdict& verdict, ExportFormat format);
/// Inverse of the JSON export. Throws Error{MalformedDocument}.
CorpusResult import_result(std::string_view json);

struct SweepRoot {
    Coordinate root;
    int max_depth = 0;
    std::vector<SweepEntry> entries;
};

struct SweepRun {
    Timestamp created_at {};
    Granularity granularity = Granularity::PackageLevel;
    std::vector<Depth> depths;
    std::vector<SweepRoot> roots; // ascending by root coordinate
    RunDiagnostics diagnostics;
};

std::string export_sweep(const SweepRun& run);
SweepRun import_sweep(std::string_view json);

/// Sweep entries keyed by root coordinate, the input of coverage_curve.
std::map<std::string, std::vector<SweepEntry>> sweep_corpus(const SweepRun& run);

std::string render_coverage_curve(const std::vector<CoverageRow>& rows, ExportFormat format);

/// Persistence of completed runs. A run id names one document.
class ResultStore {
public:
    virtual ~ResultStore() = default;

    virtual void save(const std::string& run_id, const CorpusResult& result) = 0;
    virtual void save(const std::string& run_id, const SweepRun& run) = 0;
    virtual CorpusResult load_result(const std::string& run_id) const = 0;
    virtual SweepRun load_sweep(const std::string& run_id) const = 0;
    virtual std::vector<std::string> runs() const = 0;
};

/// <root>/<run_id>/result.json or sweep.json, plus <root>/index.json listing
/// every run with its kind, setting and timestamp.
class DirectoryStore final : public ResultStore {
public:
    explicit DirectoryStore(std::filesystem::path root);

    void save(const std::string& run_id, const CorpusResult& result) override;
    void save(const std::string& run_id, const SweepRun& run) override;
    CorpusResult load_result(const std::string& run_id) const override;
    SweepRun load_sweep(const std::string& run_id) const override;
    std::vector<std::string> runs() const override;

    /// Reads a run directory directly, without an index.
    static CorpusResult read_result_dir(const std::filesystem::path& run_dir);
    static SweepRun read_sweep_dir(const std::filesystem::path& run_dir);

private:
    void record(const std::string& run_id, std::string_view kind, std::string label, Timestamp created_at);

    std::filesystem::path root_;
};

struct ImpactRow {
    std::string advisory_id;
    std::string project;
    std::size_t potentially_affected = 0;
    std::size_t actually_affected = 0;
    double proportion_pkg = 0.0;    // percent of the package-level vulnerable roots
    double proportion_method = 0.0; // percent of the method-level vulnerable roots
};

/// Rows by potentially_affected descending, then advisory id. Throws
/// Error{CorpusMismatch} unless the two results cover the same roots at the
/// same depth with package and method granularity respectively.
std::vector<ImpactRow> top_impact(const CorpusResult& package_level, const CorpusResult& method_level, std::size_t n);

/// CVE ID, Project, Potentially Affected, Actually affected, D_p(k) %, D_m(k) %
std::string render_top_impact(const std::vector<ImpactRow>& rows, Depth depth, ExportFormat format);

struct VersionDistributionRow {
    std::string project;
    std::size_t total = 0;
    std::size_t vulnerable = 0;
    double percent = 0.0;
};

struct VersionDistribution {
    std::vector<VersionDistributionRow> rows; // by project id
    /// Medians over projects with at least one vulnerable release.
    std::optional<double> median_total;
    std::optional<double> median_vulnerable;
    std::optional<double> median_percent;
    std::vector<std::string> missing_projects; // advised but absent from the registry
};

VersionDistribution version_distribution(const AdvisoryCollection& kb, const Registry& registry);

std::string render_version_distribution(const VersionDistribution& dist, ExportFormat format);

} // namespace sca
