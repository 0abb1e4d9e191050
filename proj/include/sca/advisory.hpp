#pragma once

#include <sca/coordinate.hpp>
#include <sca/version.hpp>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sca {

/// Source labels are kept verbatim: GitHub says "Moderate", NVD "Medium".
enum class Severity { Critical, High, Moderate, Medium, Low, Unknown };

std::string_view to_string(Severity s);
/// Case-insensitive; anything unrecognized maps to Unknown.
Severity parse_severity(std::string_view label);
/// Moderate -> Medium; every other label unchanged.
Severity unify(Severity s);

using Date = std::chrono::year_month_day;

std::string format_date(const Date& d);
/// Accepts "YYYY-MM-DD" optionally followed by a time part.
std::optional<Date> parse_date(std::string_view text);

struct AffectedRange {
    std::string project_id;
    VersionRange range;

    friend bool operator==(const AffectedRange&, const AffectedRange&) = default;
};

struct Advisory {
    std::string id;
    std::vector<std::string> aliases;
    std::vector<std::string> purls;
    std::optional<std::vector<std::string>> cpe;
    std::optional<double> cvss_score;
    std::vector<std::string> cwe_ids;
    Severity severity = Severity::Unknown;
    std::optional<Date> published;
    std::optional<Date> last_modified;
    std::string description;
    std::vector<std::string> references;
    std::vector<std::string> patch_links;
    std::vector<std::string> exploit_links;
    std::vector<AffectedRange> affected_ranges;

    /// Throws Error{MalformedDocument} or Error{MissingId} when an invariant
    /// does not hold.
    void validate() const;

    friend bool operator==(const Advisory&, const Advisory&) = default;
};

enum class SourceFormat { Osv, NormalizedNative };

/// Throws Error{MalformedDocument} or Error{MissingId}.
Advisory parse_advisory(std::string_view raw_document, SourceFormat format);

/// Picks NormalizedNative when the document carries "affected_ranges",
/// otherwise Osv.
SourceFormat detect_format(std::string_view raw_document);

/// The normalized lower_snake_case document, pretty printed with sorted keys
/// so output is byte-stable.
std::string emit_normalized(const Advisory& advisory);

enum class ReferenceKind { CommitLink, PullRequest, Issue, IssueTrackerItem, RevisionLink, Other };

std::string_view to_string(ReferenceKind k);

struct ReferenceClass {
    std::string url;
    ReferenceKind kind = ReferenceKind::Other;
};

/// Pure URL-shape classification. Throws Error{InvalidUrl}.
ReferenceClass classify_reference(std::string_view url);

/// Whether a reference of this class can lead to a patch commit.
bool is_patch_candidate(ReferenceKind kind);

/// Write-once knowledge base keyed by advisory id.
class AdvisoryCollection {
public:
    /// Throws Error{DuplicateAdvisory} if the id is already present.
    void add(Advisory advisory);

    const std::vector<Advisory>& all() const noexcept { return advisories_; }
    std::size_t size() const noexcept { return advisories_.size(); }
    bool empty() const noexcept { return advisories_.empty(); }

    const Advisory* find(std::string_view id) const;
    /// Advisories with at least one affected range for the project, by id.
    std::vector<const Advisory*> for_project(std::string_view project_id) const;
    /// Every project that appears in some affected range.
    std::vector<std::string> projects() const;

    /// Loads every *.json file (sorted by name), auto-detecting the format.
    static AdvisoryCollection load_directory(const std::filesystem::path& dir);

private:
    std::vector<Advisory> advisories_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_project_;
};

/// Ids (ascending) of every advisory with an affected range for the
/// coordinate's project that contains its version. A project without
/// advisories yields an empty list.
std::vector<std::string> is_dependency_affected(const Coordinate& dep, const AdvisoryCollection& kb);

struct YearSeverityRow {
    std::optional<int> year; // nullopt: advisory without a published date
    Severity severity = Severity::Unknown;
    std::size_t count = 0;
};

struct YearSeverityTable {
    std::vector<YearSeverityRow> rows; // by year (unknown last), then severity
    std::size_t unknown_severity = 0;  // advisories left out of the rows
};

YearSeverityTable stats_by_year_and_severity(const AdvisoryCollection& kb, bool unified_scale = false);

struct YearRow {
    std::optional<int> year;
    std::size_t advisories = 0;
    std::size_t affected_projects = 0;
};

std::vector<YearRow> stats_by_year(const AdvisoryCollection& kb);

struct CweRow {
    std::string cwe_id;
    std::size_t count = 0;
    std::map<Severity, std::size_t> by_severity;
};

struct CweTable {
    std::vector<CweRow> rows;
    std::size_t excluded_without_cwe = 0;
};

/// Rows sorted by count descending, then cwe id ascending. An advisory
/// contributes one count to each of its CWE tags. Throws
/// std::invalid_argument when top_n is zero.
CweTable cwe_frequency(const AdvisoryCollection& kb, std::size_t top_n, bool unified_scale = false);

} // namespace sca
