#include <sca/patch.hpp>

#include <sca/callgraph.hpp>
#include <sca/coordinate.hpp>
#include <sca/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace sca {

namespace {

[[noreturn]] void malformed_diff(std::size_t line_no, const std::string& why)
{
    throw Error(ErrorCode::MalformedDiff, "line " + std::to_string(line_no) + ": " + why);
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos)
            break;
        pos = nl + 1;
    }
    return lines;
}

bool starts_with(std::string_view s, std::string_view prefix)
{
    return s.substr(0, prefix.size()) == prefix;
}

std::string header_path(std::string_view raw, std::string_view prefix)
{
    std::string_view path = raw;
    if (!path.empty() && path.front() == '"') {
        auto close = path.find('"', 1);
        path = path.substr(1, close == std::string_view::npos ? std::string_view::npos : close - 1);
    } else if (auto tab = path.find('\t'); tab != std::string_view::npos) {
        path = path.substr(0, tab);
    }
    while (!path.empty() && path.back() == ' ')
        path.remove_suffix(1);
    if (path != "/dev/null" && starts_with(path, prefix))
        path.remove_prefix(prefix.size());
    return std::string(path);
}

bool parse_number(std::string_view& s, int& out)
{
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc {} || ptr == begin)
        return false;
    s.remove_prefix(static_cast<std::size_t>(ptr - begin));
    return true;
}

// "-start[,count]" or "+start[,count]"; a missing count means 1.
bool parse_range_part(std::string_view& s, char sign, int& start, int& count)
{
    if (s.empty() || s.front() != sign)
        return false;
    s.remove_prefix(1);
    if (!parse_number(s, start) || start < 0)
        return false;
    count = 1;
    if (!s.empty() && s.front() == ',') {
        s.remove_prefix(1);
        if (!parse_number(s, count) || count < 0)
            return false;
    }
    return true;
}

struct HunkHeader {
    int old_start = 0;
    int old_count = 0;
    int new_start = 0;
    int new_count = 0;
};

bool parse_hunk_header(std::string_view line, HunkHeader& h)
{
    if (!starts_with(line, "@@ "))
        return false;
    line.remove_prefix(3);
    if (!parse_range_part(line, '-', h.old_start, h.old_count))
        return false;
    if (!starts_with(line, " "))
        return false;
    line.remove_prefix(1);
    if (!parse_range_part(line, '+', h.new_start, h.new_count))
        return false;
    if (!starts_with(line, " @@"))
        return false;
    // A side with lines must start at line 1 or later.
    if ((h.old_count > 0 && h.old_start < 1) || (h.new_count > 0 && h.new_start < 1))
        return false;
    return true;
}

} // namespace

std::vector<FileDiff> parse_unified_diff(std::string_view text)
{
    const auto lines = split_lines(text);
    std::vector<FileDiff> files;
    FileDiff* current = nullptr;

    std::size_t i = 0;
    while (i < lines.size()) {
        const auto line = lines[i];
        if (starts_with(line, "diff --git ")) {
            current = nullptr;
            ++i;
            continue;
        }
        if (starts_with(line, "--- ") && i + 1 < lines.size() && starts_with(lines[i + 1], "+++ ")) {
            const auto old_path = header_path(line.substr(4), "a/");
            const auto new_path = header_path(lines[i + 1].substr(4), "b/");
            const auto& path = new_path == "/dev/null" ? old_path : new_path;
            if (path.empty() || path == "/dev/null")
                malformed_diff(i + 1, "file header without a path");
            files.push_back(FileDiff { path, {}, {} });
            current = &files.back();
            i += 2;
            continue;
        }
        if (starts_with(line, "@@")) {
            if (current == nullptr)
                malformed_diff(i + 1, "hunk before any file header");
            HunkHeader h;
            if (!parse_hunk_header(line, h))
                malformed_diff(i + 1, "bad hunk header '" + std::string(line) + "'");
            int old_line = h.old_start;
            int new_line = h.new_start;
            int old_left = h.old_count;
            int new_left = h.new_count;
            ++i;
            while (old_left > 0 || new_left > 0) {
                if (i >= lines.size())
                    malformed_diff(i, "hunk truncated");
                const auto body = lines[i];
                const char tag = body.empty() ? ' ' : body.front();
                switch (tag) {
                case ' ':
                    if (old_left == 0 || new_left == 0)
                        malformed_diff(i + 1, "context line exceeds hunk counts");
                    ++old_line;
                    ++new_line;
                    --old_left;
                    --new_left;
                    break;
                case '-':
                    if (old_left == 0)
                        malformed_diff(i + 1, "removal exceeds hunk old count");
                    current->modified_lines_pre.insert(old_line++);
                    --old_left;
                    break;
                case '+':
                    if (new_left == 0)
                        malformed_diff(i + 1, "addition exceeds hunk new count");
                    current->modified_lines_post.insert(new_line++);
                    --new_left;
                    break;
                case '\\':
                    break;
                default:
                    malformed_diff(i + 1, "unexpected line inside hunk");
                }
                ++i;
            }
            if (i < lines.size() && starts_with(lines[i], "\\"))
                ++i;
            continue;
        }
        ++i;
    }
    return merge_file_diffs(files);
}

std::vector<FileDiff> merge_file_diffs(std::span<const FileDiff> diffs)
{
    std::map<std::string, FileDiff> by_path;
    for (const auto& d : diffs) {
        auto& slot = by_path[d.path];
        slot.path = d.path;
        slot.modified_lines_pre.insert(d.modified_lines_pre.begin(), d.modified_lines_pre.end());
        slot.modified_lines_post.insert(d.modified_lines_post.begin(), d.modified_lines_post.end());
    }
    std::vector<FileDiff> out;
    out.reserve(by_path.size());
    for (auto& [_, d] : by_path)
        out.push_back(std::move(d));
    return out;
}

std::string render_unified_diff(std::span<const FileDiff> diffs)
{
    std::ostringstream out;
    for (const auto& d : diffs) {
        if (d.modified_lines_pre.empty() && d.modified_lines_post.empty())
            continue;
        const int max_old = d.modified_lines_pre.empty() ? 0 : *d.modified_lines_pre.rbegin();
        const int max_new = d.modified_lines_post.empty() ? 0 : *d.modified_lines_post.rbegin();
        // Walk both images from line 1: removals first, then additions, and
        // context wherever neither side changes.
        std::ostringstream body;
        int o = 1;
        int n = 1;
        int old_count = 0;
        int new_count = 0;
        while (o <= max_old || n <= max_new) {
            if (d.modified_lines_pre.count(o)) {
                body << "-old " << o << '\n';
                ++o;
                ++old_count;
            } else if (d.modified_lines_post.count(n)) {
                body << "+new " << n << '\n';
                ++n;
                ++new_count;
            } else {
                body << " ctx " << o << '\n';
                ++o;
                ++n;
                ++old_count;
                ++new_count;
            }
        }
        out << "--- a/" << d.path << '\n' << "+++ b/" << d.path << '\n';
        out << "@@ -" << (old_count == 0 ? 0 : 1) << ',' << old_count << " +" << (new_count == 0 ? 0 : 1) << ','
            << new_count << " @@\n";
        out << body.str();
    }
    return out.str();
}

// ---------------------------------------------------------------------------

void CallableIndex::add(CallableSpan span)
{
    if (span.start_line < 1 || span.start_line > span.end_line)
        throw Error(ErrorCode::MalformedGraph, "bad span for " + span.signature);
    auto& spans = by_file_[span.file];
    auto next = spans.lower_bound(span.start_line);
    if (next != spans.end() && next->second.start_line <= span.end_line)
        throw Error(ErrorCode::OverlappingSpans, span.signature + " overlaps " + next->second.signature + " in " + span.file);
    if (next != spans.begin()) {
        auto prev = std::prev(next);
        if (prev->second.end_line >= span.start_line)
            throw Error(ErrorCode::OverlappingSpans, span.signature + " overlaps " + prev->second.signature + " in " + span.file);
    }
    signatures_.insert(span.signature);
    const int start = span.start_line;
    spans.emplace(start, std::move(span));
}

const CallableSpan* CallableIndex::enclosing(std::string_view file, int line) const
{
    auto f = by_file_.find(file);
    if (f == by_file_.end())
        return nullptr;
    auto it = f->second.upper_bound(line);
    if (it == f->second.begin())
        return nullptr;
    --it;
    return it->second.end_line >= line ? &it->second : nullptr;
}

bool CallableIndex::has_signature(std::string_view signature) const
{
    return signatures_.find(signature) != signatures_.end();
}

CallableIndex CallableIndex::from_graph(const PackageCallGraph& graph)
{
    CallableIndex index;
    for (const auto& node : graph.nodes) {
        if (node.file.empty()) {
            index.signatures_.insert(node.signature);
            continue;
        }
        index.add(CallableSpan { node.signature, node.file, node.start_line, node.end_line });
    }
    return index;
}

std::set<std::string> locate_vulnerable_callables(std::span<const FileDiff> diffs,
                                                  const CallableIndex& first_patched,
                                                  const CallableIndex& last_vulnerable)
{
    std::set<std::string> out;
    for (const auto& d : diffs) {
        for (int line : d.modified_lines_post) {
            if (const auto* span = first_patched.enclosing(d.path, line))
                out.insert(span->signature);
        }
        for (int line : d.modified_lines_pre) {
            if (const auto* span = last_vulnerable.enclosing(d.path, line))
                out.insert(span->signature);
        }
    }
    return out;
}

Propagation propagate_to_affected_versions(const std::set<std::string>& signatures,
                                           const AffectedVersions& affected,
                                           const std::map<PackageVersion, CallableIndex>& indices)
{
    Propagation result;
    for (const auto& v : affected.vulnerable_versions) {
        auto it = indices.find(v);
        if (it == indices.end()) {
            result.missing_versions.push_back(v);
            continue;
        }
        auto& present = result.by_version[v];
        for (const auto& sig : signatures) {
            if (it->second.has_signature(sig))
                present.insert(sig);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

namespace {

std::string read_file(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

PackageVersion manifest_version(const std::string& text, const std::string& project)
{
    if (text.find(':') != std::string::npos) {
        auto c = Coordinate::parse(text);
        if (c.project_id() != project)
            throw Error(ErrorCode::InvalidPatchContext, text + " does not belong to " + project);
        return c.version;
    }
    return PackageVersion::parse(text);
}

} // namespace

PatchManifest PatchManifest::parse(std::string_view raw, const std::filesystem::path& base_dir)
{
    using nlohmann::json;
    const json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorCode::MalformedDocument, "patch manifest is not a JSON object");
    PatchManifest m;
    try {
        m.advisory_id = doc.at("advisory_id").get<std::string>();
        m.project_id = doc.at("project_id").get<std::string>();
        m.last_vulnerable = manifest_version(doc.at("last_vulnerable").get<std::string>(), m.project_id);
        m.first_patched = manifest_version(doc.at("first_patched").get<std::string>(), m.project_id);
        for (const auto& f : doc.at("diff_files"))
            m.diff_files.push_back(base_dir / f.get<std::string>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, std::string("patch manifest: ") + e.what());
    }
    if (m.advisory_id.empty())
        throw Error(ErrorCode::MissingId, "patch manifest without advisory_id");
    if (!(m.last_vulnerable < m.first_patched))
        throw Error(ErrorCode::InvalidPatchContext, m.advisory_id + ": last vulnerable " + m.last_vulnerable.original()
                                                        + " is not below first patched " + m.first_patched.original());
    return m;
}

PatchManifest PatchManifest::load(const std::filesystem::path& file)
{
    return parse(read_file(file), file.parent_path());
}

PatchCommit load_patch_commit(const PatchManifest& manifest)
{
    std::vector<FileDiff> all;
    for (const auto& file : manifest.diff_files) {
        auto diffs = parse_unified_diff(read_file(file));
        all.insert(all.end(), diffs.begin(), diffs.end());
    }
    PatchCommit commit { manifest.advisory_id, manifest.project_id, merge_file_diffs(all) };
    if (commit.file_diffs.empty())
        throw Error(ErrorCode::MalformedDiff, manifest.advisory_id + ": patch has no file diffs");
    return commit;
}

std::vector<PatchManifest> load_patch_manifests(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::Io, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<PatchManifest> out;
    for (const auto& f : files)
        out.push_back(PatchManifest::load(f));
    return out;
}

} // namespace sca
