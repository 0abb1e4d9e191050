#pragma once

#include <sca/version.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sca {

struct PackageCallGraph;

/// Line numbers touched by a patch in one file: removed lines of the
/// pre-image and added lines of the post-image. Context lines never appear.
struct FileDiff {
    std::string path;
    std::set<int> modified_lines_pre;
    std::set<int> modified_lines_post;

    friend bool operator==(const FileDiff&, const FileDiff&) = default;
};

/// Parses plain or git-format unified diffs. Paths drop the a/ and b/
/// prefixes; deleted files keep their old path. Repeated paths are merged.
/// Throws Error{MalformedDiff}.
std::vector<FileDiff> parse_unified_diff(std::string_view text);

/// Re-emits a diff carrying exactly the given modified lines (one hunk per
/// file, placeholder content).
std::string render_unified_diff(std::span<const FileDiff> diffs);

/// Union of diffs by path, sorted by path.
std::vector<FileDiff> merge_file_diffs(std::span<const FileDiff> diffs);

struct CallableSpan {
    std::string signature;
    std::string file;
    int start_line = 0;
    int end_line = 0;
};

/// Per-file callable spans of one package version; spans of one file never
/// overlap so every line has at most one enclosing callable.
class CallableIndex {
public:
    /// Throws Error{OverlappingSpans} on overlap and Error{MalformedGraph} on
    /// a span with start_line > end_line or start_line < 1.
    void add(CallableSpan span);

    const CallableSpan* enclosing(std::string_view file, int line) const;
    bool has_signature(std::string_view signature) const;
    std::size_t size() const noexcept { return signatures_.size(); }

    /// Spans of every node that has a file; nodes without one are skipped.
    static CallableIndex from_graph(const PackageCallGraph& graph);

private:
    std::map<std::string, std::map<int, CallableSpan>, std::less<>> by_file_; // keyed by start_line
    std::set<std::string, std::less<>> signatures_;
};

/// Signatures whose span in the first-patched version contains an added line,
/// united with those whose span in the last-vulnerable version contains a
/// removed line.
std::set<std::string> locate_vulnerable_callables(std::span<const FileDiff> diffs,
                                                  const CallableIndex& first_patched,
                                                  const CallableIndex& last_vulnerable);

struct AffectedVersions;

struct Propagation {
    std::map<PackageVersion, std::set<std::string>> by_version;
    std::vector<PackageVersion> missing_versions; // affected but without an index
};

/// Keeps, per affected version, the signatures that exist verbatim in that
/// version's index.
Propagation propagate_to_affected_versions(const std::set<std::string>& signatures,
                                           const AffectedVersions& affected,
                                           const std::map<PackageVersion, CallableIndex>& indices);

/// {advisory_id, project_id, last_vulnerable, first_patched, diff_files: [paths]}
struct PatchManifest {
    std::string advisory_id;
    std::string project_id;
    PackageVersion last_vulnerable;
    PackageVersion first_patched;
    std::vector<std::filesystem::path> diff_files; // resolved against the manifest's directory

    /// Versions may be given bare or as full coordinates. Throws
    /// Error{MalformedDocument} or Error{InvalidPatchContext}.
    static PatchManifest parse(std::string_view raw, const std::filesystem::path& base_dir);
    static PatchManifest load(const std::filesystem::path& file);
};

struct PatchCommit {
    std::string advisory_id;
    std::string project_id;
    std::vector<FileDiff> file_diffs;
};

/// Reads and unions every diff file of the manifest. Throws
/// Error{MalformedDiff} when the union is empty, Error{Io} on unreadable files.
PatchCommit load_patch_commit(const PatchManifest& manifest);

/// Every manifest.json below dir, sorted by path.
std::vector<PatchManifest> load_patch_manifests(const std::filesystem::path& dir);

} // namespace sca
