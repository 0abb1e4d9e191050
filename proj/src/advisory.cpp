#include <sca/advisory.hpp>

#include <sca/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sca {

using nlohmann::json;

namespace {

std::string lower_copy(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

[[noreturn]] void malformed(const std::string& why)
{
    throw Error(ErrorCode::MalformedDocument, why);
}

void push_unique(std::vector<std::string>& v, const std::string& s)
{
    if (std::find(v.begin(), v.end(), s) == v.end())
        v.push_back(s);
}

} // namespace

std::string_view to_string(Severity s)
{
    switch (s) {
    case Severity::Critical:
        return "Critical";
    case Severity::High:
        return "High";
    case Severity::Moderate:
        return "Moderate";
    case Severity::Medium:
        return "Medium";
    case Severity::Low:
        return "Low";
    case Severity::Unknown:
        return "Unknown";
    }
    return "Unknown";
}

Severity parse_severity(std::string_view label)
{
    const auto l = lower_copy(label);
    if (l == "critical")
        return Severity::Critical;
    if (l == "high")
        return Severity::High;
    if (l == "moderate")
        return Severity::Moderate;
    if (l == "medium")
        return Severity::Medium;
    if (l == "low")
        return Severity::Low;
    return Severity::Unknown;
}

Severity unify(Severity s)
{
    return s == Severity::Moderate ? Severity::Medium : s;
}

std::string format_date(const Date& d)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::optional<Date> parse_date(std::string_view text)
{
    if (text.size() < 10 || text[4] != '-' || text[7] != '-')
        return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ')
        return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    for (std::size_t i : { 0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u }) {
        if (!std::isdigit(static_cast<unsigned char>(text[i])))
            return std::nullopt;
    }
    y = std::stoi(std::string(text.substr(0, 4)));
    m = static_cast<unsigned>(std::stoi(std::string(text.substr(5, 2))));
    d = static_cast<unsigned>(std::stoi(std::string(text.substr(8, 2))));
    Date date { std::chrono::year { y }, std::chrono::month { m }, std::chrono::day { d } };
    if (!date.ok())
        return std::nullopt;
    return date;
}

void Advisory::validate() const
{
    if (id.empty())
        throw Error(ErrorCode::MissingId, "advisory without id");
    if (cvss_score && (!(*cvss_score >= 0.0) || *cvss_score > 10.0))
        malformed(id + ": cvss_score " + std::to_string(*cvss_score) + " outside [0, 10]");
    if (published && last_modified && *last_modified < *published)
        malformed(id + ": last_modified precedes published");
    for (const auto& link : patch_links) {
        if (std::find(references.begin(), references.end(), link) == references.end())
            malformed(id + ": patch link not among references: " + link);
    }
    for (const auto& r : affected_ranges) {
        if (r.project_id.empty())
            malformed(id + ": affected range without project");
    }
}

// ---------------------------------------------------------------------------
// Reference classification

namespace {

struct UrlParts {
    std::string host;
    std::vector<std::string> segments;
    std::string query;
};

UrlParts split_url(std::string_view url)
{
    auto invalid = [&url](const char* why) {
        throw Error(ErrorCode::InvalidUrl, std::string(why) + ": '" + std::string(url) + "'");
    };
    if (url.empty())
        invalid("empty url");
    if (std::any_of(url.begin(), url.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
        invalid("whitespace in url");
    const auto sep = url.find("://");
    if (sep == std::string_view::npos || sep == 0)
        invalid("missing scheme");
    if (!std::isalpha(static_cast<unsigned char>(url[0])))
        invalid("bad scheme");
    for (char c : url.substr(0, sep)) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
            invalid("bad scheme");
    }

    UrlParts parts;
    std::string_view rest = url.substr(sep + 3);
    const auto host_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, host_end);
    if (auto at = authority.rfind('@'); at != std::string_view::npos)
        authority = authority.substr(at + 1);
    if (auto colon = authority.find(':'); colon != std::string_view::npos)
        authority = authority.substr(0, colon);
    if (authority.empty())
        invalid("missing host");
    parts.host = lower_copy(authority);

    rest = host_end == std::string_view::npos ? std::string_view {} : rest.substr(host_end);
    if (auto hash = rest.find('#'); hash != std::string_view::npos)
        rest = rest.substr(0, hash);
    std::string_view path = rest;
    if (auto q = rest.find('?'); q != std::string_view::npos) {
        path = rest.substr(0, q);
        parts.query = std::string(rest.substr(q + 1));
    }
    std::size_t pos = 0;
    while (pos <= path.size()) {
        auto next = path.find('/', pos);
        auto seg = path.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        if (!seg.empty())
            parts.segments.emplace_back(seg);
        if (next == std::string_view::npos)
            break;
        pos = next + 1;
    }
    return parts;
}

bool is_hex_id(std::string_view s)
{
    return s.size() >= 7 && std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

bool is_number(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_tracker_key(std::string_view s)
{
    // PROJECT-123
    const auto dash = s.find('-');
    if (dash == std::string_view::npos || dash == 0)
        return false;
    return std::all_of(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(dash),
                       [](char c) { return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)); })
        && is_number(s.substr(dash + 1));
}

bool followed_by(const std::vector<std::string>& segs, std::initializer_list<std::string_view> names,
                 bool (*pred)(std::string_view))
{
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        if (std::find(names.begin(), names.end(), segs[i]) != names.end() && pred(segs[i + 1]))
            return true;
    }
    return false;
}

bool has_query_param(const std::string& query, std::string_view key, std::string_view value = {})
{
    std::string_view q = query;
    while (!q.empty()) {
        auto amp = q.find_first_of("&;");
        auto kv = q.substr(0, amp);
        auto eq = kv.find('=');
        auto k = kv.substr(0, eq);
        auto v = eq == std::string_view::npos ? std::string_view {} : kv.substr(eq + 1);
        if (k == key && (value.empty() || v == value))
            return true;
        if (amp == std::string_view::npos)
            break;
        q = q.substr(amp + 1);
    }
    return false;
}

bool has_segment(const std::vector<std::string>& segs, std::string_view name)
{
    return std::find(segs.begin(), segs.end(), name) != segs.end();
}

} // namespace

std::string_view to_string(ReferenceKind k)
{
    switch (k) {
    case ReferenceKind::CommitLink:
        return "CommitLink";
    case ReferenceKind::PullRequest:
        return "PullRequest";
    case ReferenceKind::Issue:
        return "Issue";
    case ReferenceKind::IssueTrackerItem:
        return "IssueTrackerItem";
    case ReferenceKind::RevisionLink:
        return "RevisionLink";
    case ReferenceKind::Other:
        return "Other";
    }
    return "Other";
}

ReferenceClass classify_reference(std::string_view url)
{
    const auto parts = split_url(url);
    const auto& segs = parts.segments;
    ReferenceClass result { std::string(url), ReferenceKind::Other };

    // gitweb (?a=commit) and cgit (/commit/?id=) name revisions by query.
    if (has_query_param(parts.query, "a", "commit") || has_query_param(parts.query, "a", "commitdiff")
        || (has_segment(segs, "commit") && has_query_param(parts.query, "id"))) {
        result.kind = ReferenceKind::RevisionLink;
        return result;
    }
    if (followed_by(segs, { "commit", "commits" }, is_hex_id)) {
        result.kind = ReferenceKind::CommitLink;
        return result;
    }
    if (followed_by(segs, { "pull", "pulls", "merge_requests", "pull-requests" }, is_number)) {
        result.kind = ReferenceKind::PullRequest;
        return result;
    }
    if (followed_by(segs, { "issues" }, is_number)) {
        result.kind = ReferenceKind::Issue;
        return result;
    }
    const bool bugzilla = parts.host.find("bugzilla") != std::string::npos
        || (!segs.empty() && segs.back() == "show_bug.cgi");
    const bool jira = parts.host.find("jira") != std::string::npos || parts.host == "issues.apache.org"
        || followed_by(segs, { "browse" }, is_tracker_key);
    if (bugzilla || jira) {
        result.kind = ReferenceKind::IssueTrackerItem;
        return result;
    }
    // Subversion and Mercurial revisions.
    const bool svn = parts.host.rfind("svn.", 0) == 0 || has_query_param(parts.query, "rev")
        || has_query_param(parts.query, "revision") || has_query_param(parts.query, "view", "revision");
    const bool hg = followed_by(segs, { "rev", "changeset" }, is_hex_id)
        || followed_by(segs, { "changeset", "revision" }, is_number);
    if (svn || hg) {
        result.kind = ReferenceKind::RevisionLink;
        return result;
    }
    return result;
}

bool is_patch_candidate(ReferenceKind kind)
{
    return kind == ReferenceKind::CommitLink || kind == ReferenceKind::PullRequest
        || kind == ReferenceKind::RevisionLink;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

json parse_json(std::string_view raw)
{
    json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (doc.is_discarded())
        malformed("document is not valid JSON");
    if (!doc.is_object())
        malformed("document root is not an object");
    return doc;
}

std::string get_string(const json& obj, const char* key)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return {};
    if (!it->is_string())
        malformed(std::string("field '") + key + "' is not a string");
    return it->get<std::string>();
}

std::vector<std::string> get_strings(const json& obj, const char* key)
{
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return out;
    if (!it->is_array())
        malformed(std::string("field '") + key + "' is not an array");
    for (const auto& v : *it) {
        if (!v.is_string())
            malformed(std::string("field '") + key + "' holds a non-string");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::optional<Date> get_date(const json& obj, const char* key)
{
    const auto text = get_string(obj, key);
    if (text.empty())
        return std::nullopt;
    auto d = parse_date(text);
    if (!d)
        malformed(std::string("field '") + key + "' is not a date: " + text);
    return d;
}

std::optional<double> parse_score(const json& v)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::istringstream in(s);
        double d = 0;
        in >> d;
        if (in && in.eof())
            return d;
    }
    return std::nullopt;
}

VersionRange range_from_text(const std::string& text, const std::string& id)
{
    const bool bracket = !text.empty() && (text.front() == '[' || text.front() == '(');
    try {
        return parse_range(text, bracket ? RangeSyntax::MavenBracket : RangeSyntax::ComparatorList);
    } catch (const Error& e) {
        malformed(id + ": " + e.what());
    }
}

PackageVersion event_version(const std::string& text, const std::string& id)
{
    try {
        return PackageVersion::parse(text);
    } catch (const Error& e) {
        malformed(id + ": " + e.what());
    }
}

// OSV events are an ordered list of introduced / fixed / last_affected
// markers; each introduced opens a clause that the next fixed or
// last_affected closes.
VersionRange range_from_osv_events(const json& events, const std::string& id)
{
    std::vector<RangeClause> clauses;
    std::optional<RangeClause> open;
    for (const auto& ev : events) {
        if (!ev.is_object())
            malformed(id + ": range event is not an object");
        if (ev.contains("introduced")) {
            if (open)
                clauses.push_back(*open);
            open = RangeClause {};
            const auto v = get_string(ev, "introduced");
            if (v != "0")
                open->lower = Bound { event_version(v, id), true };
        } else if (ev.contains("fixed") || ev.contains("last_affected")) {
            const bool fixed = ev.contains("fixed");
            const auto v = get_string(ev, fixed ? "fixed" : "last_affected");
            if (!open)
                open = RangeClause {};
            open->upper = Bound { event_version(v, id), !fixed };
            if (open->lower && open->lower->version > open->upper->version)
                malformed(id + ": range event bounds reversed");
            clauses.push_back(*open);
            open.reset();
        }
    }
    if (open)
        clauses.push_back(*open);
    return VersionRange(std::move(clauses));
}

std::string maven_purl(const std::string& name)
{
    const auto colon = name.find(':');
    if (colon == std::string::npos)
        return "pkg:maven/" + name;
    return "pkg:maven/" + name.substr(0, colon) + "/" + name.substr(colon + 1);
}

bool is_exploit_host(const std::string& url)
{
    try {
        const auto parts = split_url(url);
        return parts.host.find("exploit-db.com") != std::string::npos
            || parts.host.find("packetstormsecurity") != std::string::npos;
    } catch (const Error&) {
        return false;
    }
}

Advisory parse_osv(const json& doc)
{
    Advisory a;
    a.id = get_string(doc, "id");
    if (a.id.empty())
        throw Error(ErrorCode::MissingId, "OSV record has no id");
    a.aliases = get_strings(doc, "aliases");
    a.published = get_date(doc, "published");
    a.last_modified = get_date(doc, "modified");
    a.description = get_string(doc, "details");
    if (a.description.empty())
        a.description = get_string(doc, "summary");

    if (auto it = doc.find("severity"); it != doc.end() && it->is_array()) {
        for (const auto& s : *it) {
            if (!s.is_object() || !s.contains("score"))
                continue;
            // Vector strings are not interpreted; only bare numeric scores.
            if (auto score = parse_score(s["score"]); score && !a.cvss_score)
                a.cvss_score = score;
        }
    }

    if (auto it = doc.find("database_specific"); it != doc.end() && it->is_object()) {
        const auto& ds = *it;
        a.cwe_ids = get_strings(ds, "cwe_ids");
        if (auto sev = ds.find("severity"); sev != ds.end() && sev->is_string())
            a.severity = parse_severity(sev->get<std::string>());
        if (auto score = ds.find("cvss_score"); score != ds.end() && !score->is_null()) {
            auto parsed = parse_score(*score);
            if (!parsed)
                malformed(a.id + ": cvss_score is not numeric");
            a.cvss_score = parsed;
        }
        if (ds.contains("cpes"))
            a.cpe = get_strings(ds, "cpes");
    }

    if (auto it = doc.find("affected"); it != doc.end()) {
        if (!it->is_array())
            malformed(a.id + ": 'affected' is not an array");
        for (const auto& entry : *it) {
            if (!entry.is_object())
                malformed(a.id + ": affected entry is not an object");
            std::string name;
            if (auto pkg = entry.find("package"); pkg != entry.end() && pkg->is_object()) {
                name = get_string(*pkg, "name");
                const auto purl = get_string(*pkg, "purl");
                const auto ecosystem = get_string(*pkg, "ecosystem");
                if (!purl.empty())
                    push_unique(a.purls, purl);
                else if (!name.empty() && lower_copy(ecosystem) == "maven")
                    push_unique(a.purls, maven_purl(name));
            }
            if (name.empty())
                malformed(a.id + ": affected entry without package name");

            std::vector<RangeClause> clauses;
            bool has_version_ranges = false;
            if (auto ranges = entry.find("ranges"); ranges != entry.end() && ranges->is_array()) {
                for (const auto& r : *ranges) {
                    const auto type = get_string(r, "type");
                    if (type == "GIT")
                        continue;
                    has_version_ranges = true;
                    if (auto events = r.find("events"); events != r.end() && events->is_array()) {
                        auto range = range_from_osv_events(*events, a.id);
                        clauses.insert(clauses.end(), range.clauses().begin(), range.clauses().end());
                    }
                }
            }
            if (auto ds = entry.find("database_specific"); ds != entry.end() && ds->is_object()) {
                const auto text = get_string(*ds, "vulnerable_version_range");
                if (!text.empty() && !has_version_ranges) {
                    auto range = range_from_text(text, a.id);
                    clauses.insert(clauses.end(), range.clauses().begin(), range.clauses().end());
                    has_version_ranges = true;
                }
            }
            if (!has_version_ranges) {
                for (const auto& v : get_strings(entry, "versions")) {
                    auto pv = event_version(v, a.id);
                    clauses.push_back(RangeClause { Bound { pv, true }, Bound { pv, true } });
                }
            }
            a.affected_ranges.push_back(AffectedRange { name, VersionRange(std::move(clauses)) });
        }
    }

    if (auto it = doc.find("references"); it != doc.end() && it->is_array()) {
        for (const auto& ref : *it) {
            if (!ref.is_object())
                malformed(a.id + ": reference is not an object");
            const auto url = get_string(ref, "url");
            if (url.empty())
                continue;
            push_unique(a.references, url);
            const auto type = get_string(ref, "type");
            bool patch = type == "FIX";
            try {
                patch = patch || is_patch_candidate(classify_reference(url).kind);
            } catch (const Error&) {
                // unclassifiable references stay plain references
            }
            if (patch)
                push_unique(a.patch_links, url);
            if (type == "EVIDENCE" || is_exploit_host(url))
                push_unique(a.exploit_links, url);
        }
    }

    a.validate();
    return a;
}

Advisory parse_native(const json& doc)
{
    Advisory a;
    a.id = get_string(doc, "id");
    if (a.id.empty())
        throw Error(ErrorCode::MissingId, "normalized advisory has no id");
    a.aliases = get_strings(doc, "aliases");
    a.purls = get_strings(doc, "purls");
    if (auto it = doc.find("cpe"); it != doc.end() && !it->is_null())
        a.cpe = get_strings(doc, "cpe");
    if (auto it = doc.find("cvss_score"); it != doc.end() && !it->is_null()) {
        if (!it->is_number())
            malformed(a.id + ": cvss_score is not a number");
        a.cvss_score = it->get<double>();
    }
    a.cwe_ids = get_strings(doc, "cwe");
    a.severity = parse_severity(get_string(doc, "severity_level"));
    a.published = get_date(doc, "published_date");
    a.last_modified = get_date(doc, "last_modified_date");
    a.description = get_string(doc, "description");
    a.references = get_strings(doc, "references");
    a.patch_links = get_strings(doc, "patch");
    a.exploit_links = get_strings(doc, "exploits");
    if (auto it = doc.find("affected_ranges"); it != doc.end()) {
        if (!it->is_array())
            malformed(a.id + ": 'affected_ranges' is not an array");
        for (const auto& entry : *it) {
            if (!entry.is_object())
                malformed(a.id + ": affected range is not an object");
            const auto project = get_string(entry, "project");
            const auto text = get_string(entry, "range");
            VersionRange range;
            if (!text.empty())
                range = range_from_text(text, a.id);
            a.affected_ranges.push_back(AffectedRange { project, std::move(range) });
        }
    }
    a.validate();
    return a;
}

} // namespace

Advisory parse_advisory(std::string_view raw_document, SourceFormat format)
{
    const json doc = parse_json(raw_document);
    try {
        return format == SourceFormat::Osv ? parse_osv(doc) : parse_native(doc);
    } catch (const json::exception& e) {
        malformed(e.what());
    }
}

SourceFormat detect_format(std::string_view raw_document)
{
    const json doc = parse_json(raw_document);
    return doc.contains("affected_ranges") ? SourceFormat::NormalizedNative : SourceFormat::Osv;
}

std::string emit_normalized(const Advisory& a)
{
    json doc;
    doc["id"] = a.id;
    doc["aliases"] = a.aliases;
    doc["purls"] = a.purls;
    doc["cpe"] = a.cpe ? json(*a.cpe) : json(nullptr);
    doc["cvss_score"] = a.cvss_score ? json(*a.cvss_score) : json(nullptr);
    doc["cwe"] = a.cwe_ids;
    doc["severity_level"] = std::string(to_string(a.severity));
    doc["published_date"] = a.published ? json(format_date(*a.published)) : json(nullptr);
    doc["last_modified_date"] = a.last_modified ? json(format_date(*a.last_modified)) : json(nullptr);
    doc["description"] = a.description;
    doc["references"] = a.references;
    doc["patch"] = a.patch_links;
    doc["exploits"] = a.exploit_links;
    json ranges = json::array();
    for (const auto& r : a.affected_ranges)
        ranges.push_back({ { "project", r.project_id }, { "range", r.range.to_maven_string() } });
    doc["affected_ranges"] = std::move(ranges);
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Knowledge base

void AdvisoryCollection::add(Advisory advisory)
{
    advisory.validate();
    if (by_id_.count(advisory.id))
        throw Error(ErrorCode::DuplicateAdvisory, "advisory '" + advisory.id + "' already loaded");
    const auto index = advisories_.size();
    by_id_.emplace(advisory.id, index);
    std::set<std::string> projects;
    for (const auto& r : advisory.affected_ranges)
        projects.insert(r.project_id);
    for (const auto& p : projects)
        by_project_[p].push_back(index);
    advisories_.push_back(std::move(advisory));
}

const Advisory* AdvisoryCollection::find(std::string_view id) const
{
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &advisories_[it->second];
}

std::vector<const Advisory*> AdvisoryCollection::for_project(std::string_view project_id) const
{
    std::vector<const Advisory*> out;
    auto it = by_project_.find(project_id);
    if (it == by_project_.end())
        return out;
    for (auto index : it->second)
        out.push_back(&advisories_[index]);
    std::sort(out.begin(), out.end(), [](const Advisory* a, const Advisory* b) { return a->id < b->id; });
    return out;
}

std::vector<std::string> AdvisoryCollection::projects() const
{
    std::vector<std::string> out;
    for (const auto& [project, _] : by_project_)
        out.push_back(project);
    return out;
}

AdvisoryCollection AdvisoryCollection::load_directory(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::Io, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    AdvisoryCollection kb;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw Error(ErrorCode::Io, "cannot read " + file.string());
        std::stringstream buf;
        buf << in.rdbuf();
        const auto text = buf.str();
        try {
            kb.add(parse_advisory(text, detect_format(text)));
        } catch (const Error& e) {
            throw Error(e.code(), file.filename().string() + ": " + e.what());
        }
    }
    return kb;
}

std::vector<std::string> is_dependency_affected(const Coordinate& dep, const AdvisoryCollection& kb)
{
    std::vector<std::string> ids;
    const auto project = dep.project_id();
    for (const auto* advisory : kb.for_project(project)) {
        for (const auto& r : advisory->affected_ranges) {
            if (r.project_id == project && r.range.contains(dep.version)) {
                ids.push_back(advisory->id);
                break;
            }
        }
    }
    return ids;
}

// ---------------------------------------------------------------------------
// Aggregations

YearSeverityTable stats_by_year_and_severity(const AdvisoryCollection& kb, bool unified_scale)
{
    YearSeverityTable table;
    // nullopt sorts first in std::optional ordering; keep dated years first
    // by keying on (has_no_date, year).
    std::map<std::tuple<bool, int, Severity>, std::size_t> counts;
    for (const auto& a : kb.all()) {
        if (a.severity == Severity::Unknown) {
            ++table.unknown_severity;
            continue;
        }
        const auto sev = unified_scale ? unify(a.severity) : a.severity;
        const bool undated = !a.published;
        const int year = undated ? 0 : static_cast<int>(a.published->year());
        ++counts[{ undated, year, sev }];
    }
    for (const auto& [key, count] : counts) {
        const auto& [undated, year, sev] = key;
        table.rows.push_back(YearSeverityRow { undated ? std::nullopt : std::optional<int>(year), sev, count });
    }
    return table;
}

std::vector<YearRow> stats_by_year(const AdvisoryCollection& kb)
{
    std::map<std::pair<bool, int>, std::pair<std::size_t, std::set<std::string>>> acc;
    for (const auto& a : kb.all()) {
        const bool undated = !a.published;
        auto& slot = acc[{ undated, undated ? 0 : static_cast<int>(a.published->year()) }];
        ++slot.first;
        for (const auto& r : a.affected_ranges)
            slot.second.insert(r.project_id);
    }
    std::vector<YearRow> rows;
    for (const auto& [key, value] : acc) {
        rows.push_back(YearRow { key.first ? std::nullopt : std::optional<int>(key.second), value.first,
                                 value.second.size() });
    }
    return rows;
}

CweTable cwe_frequency(const AdvisoryCollection& kb, std::size_t top_n, bool unified_scale)
{
    if (top_n == 0)
        throw std::invalid_argument("top_n must be at least 1");
    CweTable table;
    std::map<std::string, CweRow> rows;
    for (const auto& a : kb.all()) {
        if (a.cwe_ids.empty()) {
            ++table.excluded_without_cwe;
            continue;
        }
        const auto sev = unified_scale ? unify(a.severity) : a.severity;
        std::set<std::string> tags(a.cwe_ids.begin(), a.cwe_ids.end());
        for (const auto& cwe : tags) {
            auto& row = rows[cwe];
            row.cwe_id = cwe;
            ++row.count;
            ++row.by_severity[sev];
        }
    }
    for (auto& [_, row] : rows)
        table.rows.push_back(std::move(row));
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const CweRow& a, const CweRow& b) {
        if (a.count != b.count)
            return a.count > b.count;
        return a.cwe_id < b.cwe_id;
    });
    if (table.rows.size() > top_n)
        table.rows.resize(top_n);
    return table;
}

} // namespace sca
