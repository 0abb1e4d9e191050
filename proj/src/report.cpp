#include <sca/report.hpp>

#include <sca/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sca {

using json = nlohmann::json;

namespace {

std::string fixed1(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string fixed4(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + p.string());
    out << content;
    if (!out)
        throw Error(ErrorCode::Io, "short write to " + p.string());
}

json parse_json(std::string_view raw)
{
    try {
        return json::parse(raw);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    }
}

template <typename F>
auto guarded(F&& f)
{
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    } catch (const std::invalid_argument& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    }
}

// Columns padded to the widest cell, two spaces apart, dashed rule under the header.
std::string render_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                        ExportFormat format)
{
    std::string out;
    if (format == ExportFormat::Tsv) {
        auto line = [&out](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i)
                    out += '\t';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows)
            line(r);
        return out;
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i)
        width[i] = header[i].size();
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size() && i < width.size(); ++i)
            width[i] = std::max(width[i], r[i].size());
    auto line = [&](const std::vector<std::string>& cells) {
        std::string l;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                l += "  ";
            l += cells[i];
            if (i + 1 < cells.size())
                l.append(width[i] - cells[i].size(), ' ');
        }
        out += l + '\n';
    };
    line(header);
    std::vector<std::string> rule;
    for (auto w : width)
        rule.emplace_back(w, '-');
    line(rule);
    for (const auto& r : rows)
        line(r);
    return out;
}

json setting_to_json(const AnalysisSetting& s)
{
    return { { "granularity", std::string(to_string(s.granularity)) }, { "depth", s.depth.to_string() } };
}

AnalysisSetting setting_from_json(const json& j)
{
    return AnalysisSetting { parse_granularity(j.at("granularity").get<std::string>()),
                             Depth::parse(j.at("depth").get<std::string>()) };
}

json verdict_to_json(const RootVerdict& v)
{
    json findings = json::array();
    for (const auto& f : v.findings) {
        json jf { { "advisory_id", f.advisory_id }, { "coordinate", f.coordinate.to_string() }, { "chain", nullptr } };
        if (f.chain) {
            json path = json::array();
            for (const auto& step : f.chain->path)
                path.push_back({ { "coordinate", step.coordinate.to_string() }, { "signature", step.signature } });
            jf["chain"] = { { "length", f.chain->length() }, { "path", path } };
        }
        findings.push_back(std::move(jf));
    }
    return { { "root", v.root.to_string() },
             { "setting", setting_to_json(v.setting) },
             { "vulnerable", v.vulnerable },
             { "findings", findings } };
}

RootVerdict verdict_from_json(const json& j)
{
    RootVerdict v;
    v.root = Coordinate::parse(j.at("root").get<std::string>());
    v.setting = setting_from_json(j.at("setting"));
    v.vulnerable = j.at("vulnerable").get<bool>();
    for (const auto& jf : j.at("findings")) {
        Finding f { jf.at("advisory_id").get<std::string>(), Coordinate::parse(jf.at("coordinate").get<std::string>()),
                    std::nullopt };
        if (!jf.at("chain").is_null()) {
            VulnerableCallChain chain { f.advisory_id, {} };
            for (const auto& step : jf.at("chain").at("path"))
                chain.path.push_back(ChainStep { Coordinate::parse(step.at("coordinate").get<std::string>()),
                                                 step.at("signature").get<std::string>() });
            f.chain = std::move(chain);
        }
        v.findings.push_back(std::move(f));
    }
    if (v.vulnerable != !v.findings.empty())
        throw Error(ErrorCode::MalformedDocument, "verdict for " + v.root.to_string() + " disagrees with its findings");
    return v;
}

json diagnostics_to_json(const RunDiagnostics& d)
{
    return { { "unresolved_calls", d.unresolved_calls },
             { "skipped_packages", d.skipped_packages },
             { "unmatched_marks", d.unmatched_marks },
             { "failed_roots", d.failed_roots } };
}

RunDiagnostics diagnostics_from_json(const json& j)
{
    RunDiagnostics d;
    d.unresolved_calls = j.at("unresolved_calls").get<std::size_t>();
    d.skipped_packages = j.at("skipped_packages").get<std::size_t>();
    d.unmatched_marks = j.at("unmatched_marks").get<std::size_t>();
    d.failed_roots = j.value("failed_roots", std::size_t { 0 });
    return d;
}

} // namespace

std::string format_timestamp(Timestamp t)
{
    const auto day = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd { day };
    const std::chrono::hh_mm_ss hms { t - day };
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

Timestamp parse_timestamp(std::string_view text)
{
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char z = 0;
    const std::string copy(text);
    if (std::sscanf(copy.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 || z != 'Z'
        || copy.size() != 20)
        throw Error(ErrorCode::MalformedDocument, "bad timestamp '" + copy + "'");
    const std::chrono::year_month_day ymd { std::chrono::year { y }, std::chrono::month { mo }, std::chrono::day { d } };
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59)
        throw Error(ErrorCode::MalformedDocument, "bad timestamp '" + copy + "'");
    return std::chrono::sys_days { ymd } + std::chrono::hours { h } + std::chrono::minutes { mi }
        + std::chrono::seconds { s };
}

Timestamp default_created_at()
{
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
        return Timestamp { std::chrono::seconds { std::strtoll(epoch, nullptr, 10) } };
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

RunDiagnostics& RunDiagnostics::operator+=(const RunDiagnostics& o)
{
    unresolved_calls += o.unresolved_calls;
    skipped_packages += o.skipped_packages;
    unmatched_marks += o.unmatched_marks;
    failed_roots += o.failed_roots;
    return *this;
}

ExportFormat parse_export_format(std::string_view text)
{
    if (text == "json")
        return ExportFormat::Json;
    if (text == "tsv")
        return ExportFormat::Tsv;
    if (text == "table")
        return ExportFormat::HumanTable;
    throw std::invalid_argument("format must be json, tsv or table: '" + std::string(text) + "'");
}

std::string export_result(const CorpusResult& result, ExportFormat format)
{
    if (format == ExportFormat::Json) {
        json verdicts = json::array();
        for (const auto& v : result.verdicts)
            verdicts.push_back(verdict_to_json(v));
        json doc { { "created_at", format_timestamp(result.created_at) },
                   { "setting", setting_to_json(result.setting) },
                   { "verdicts", verdicts },
                   { "diagnostics", diagnostics_to_json(result.diagnostics) } };
        return doc.dump(2) + "\n";
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& v : result.verdicts) {
        std::string ids;
        for (const auto& id : v.advisory_ids())
            ids += (ids.empty() ? "" : ",") + id;
        std::size_t shortest = 0;
        for (const auto& f : v.findings)
            if (f.chain && (shortest == 0 || f.chain->length() < shortest))
                shortest = f.chain->length();
        rows.push_back({ v.root.to_string(), v.setting.label(), v.vulnerable ? "yes" : "no",
                         std::to_string(v.findings.size()), ids.empty() ? "-" : ids,
                         shortest ? std::to_string(shortest) : "-" });
    }
    return render_rows({ "root", "setting", "vulnerable", "findings", "advisories", "shortest_chain" }, rows, format);
}

std::string export_verdict(const RootVerdict& verdict, ExportFormat format)
{
    if (format == ExportFormat::Json)
        return verdict_to_json(verdict).dump(2) + "\n";
    std::string out = verdict.root.to_string() + "  " + verdict.setting.label() + "  "
        + (verdict.vulnerable ? "VULNERABLE" : "not vulnerable") + "\n";
    for (const auto& f : verdict.findings) {
        out += "  " + f.advisory_id + "  " + f.coordinate.to_string();
        if (f.chain) {
            out += "  length " + std::to_string(f.chain->length()) + ":";
            for (std::size_t i = 0; i < f.chain->path.size(); ++i)
                out += (i ? " -> " : " ") + f.chain->path[i].signature;
        }
        out += "\n";
    }
    return out;
}

CorpusResult import_result(std::string_view raw)
{
    const auto doc = parse_json(raw);
    return guarded([&] {
        CorpusResult r;
        r.created_at = parse_timestamp(doc.at("created_at").get<std::string>());
        r.setting = setting_from_json(doc.at("setting"));
        std::set<std::string> seen;
        for (const auto& jv : doc.at("verdicts")) {
            r.verdicts.push_back(verdict_from_json(jv));
            if (!seen.insert(r.verdicts.back().root.to_string()).second)
                throw Error(ErrorCode::MalformedDocument, "duplicate root " + r.verdicts.back().root.to_string());
        }
        r.diagnostics = diagnostics_from_json(doc.at("diagnostics"));
        return r;
    });
}

std::string export_sweep(const SweepRun& run)
{
    json depths = json::array();
    for (const auto& d : run.depths)
        depths.push_back(d.to_string());
    json roots = json::array();
    for (const auto& r : run.roots) {
        json entries = json::array();
        for (const auto& e : r.entries)
            entries.push_back({ { "depth", e.depth.to_string() },
                                { "cumulative_advisories", e.cumulative_advisories },
                                { "exact_level_advisories", e.exact_level_advisories },
                                { "verdict", verdict_to_json(e.verdict) } });
        roots.push_back({ { "root", r.root.to_string() }, { "max_depth", r.max_depth }, { "entries", entries } });
    }
    json doc { { "created_at", format_timestamp(run.created_at) },
               { "granularity", std::string(to_string(run.granularity)) },
               { "depths", depths },
               { "roots", roots },
               { "diagnostics", diagnostics_to_json(run.diagnostics) } };
    return doc.dump(2) + "\n";
}

SweepRun import_sweep(std::string_view raw)
{
    const auto doc = parse_json(raw);
    return guarded([&] {
        SweepRun run;
        run.created_at = parse_timestamp(doc.at("created_at").get<std::string>());
        run.granularity = parse_granularity(doc.at("granularity").get<std::string>());
        for (const auto& d : doc.at("depths"))
            run.depths.push_back(Depth::parse(d.get<std::string>()));
        for (const auto& jr : doc.at("roots")) {
            SweepRoot r;
            r.root = Coordinate::parse(jr.at("root").get<std::string>());
            r.max_depth = jr.at("max_depth").get<int>();
            for (const auto& je : jr.at("entries")) {
                SweepEntry e;
                e.depth = Depth::parse(je.at("depth").get<std::string>());
                e.cumulative_advisories = je.at("cumulative_advisories").get<std::size_t>();
                e.exact_level_advisories = je.at("exact_level_advisories").get<std::size_t>();
                e.verdict = verdict_from_json(je.at("verdict"));
                e.root_max_depth = r.max_depth;
                r.entries.push_back(std::move(e));
            }
            run.roots.push_back(std::move(r));
        }
        run.diagnostics = diagnostics_from_json(doc.at("diagnostics"));
        return run;
    });
}

std::map<std::string, std::vector<SweepEntry>> sweep_corpus(const SweepRun& run)
{
    std::map<std::string, std::vector<SweepEntry>> out;
    for (const auto& r : run.roots)
        out[r.root.to_string()] = r.entries;
    return out;
}

std::string render_coverage_curve(const std::vector<CoverageRow>& rows, ExportFormat format)
{
    if (format == ExportFormat::Json) {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({ { "depth", r.depth.to_string() },
                            { "vulnerable_roots", r.vulnerable_roots },
                            { "ratio", r.ratio ? json(*r.ratio) : json(nullptr) } });
        return json { { "coverage", arr } }.dump(2) + "\n";
    }
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({ r.depth.to_string(), std::to_string(r.vulnerable_roots), r.ratio ? fixed4(*r.ratio) : "undefined" });
    return render_rows({ "k", "vulnerable_roots", "ratio_to_max" }, cells, format);
}

DirectoryStore::DirectoryStore(std::filesystem::path root)
    : root_(std::move(root))
{
    std::filesystem::create_directories(root_);
}

void DirectoryStore::record(const std::string& run_id, std::string_view kind, std::string label, Timestamp created_at)
{
    const auto index_path = root_ / "index.json";
    json index { { "runs", json::array() } };
    if (std::filesystem::exists(index_path))
        index = parse_json(read_file(index_path));
    auto& runs = index.at("runs");
    json entry { { "id", run_id }, { "kind", std::string(kind) }, { "setting", std::move(label) },
                 { "created_at", format_timestamp(created_at) } };
    auto it = std::find_if(runs.begin(), runs.end(), [&](const json& r) { return r.at("id") == run_id; });
    if (it != runs.end())
        *it = entry;
    else
        runs.push_back(entry);
    std::sort(runs.begin(), runs.end(), [](const json& a, const json& b) {
        return a.at("id").get<std::string>() < b.at("id").get<std::string>();
    });
    write_file(index_path, index.dump(2) + "\n");
}

static void check_run_id(const std::string& run_id)
{
    if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id == "." || run_id == "..")
        throw std::invalid_argument("bad run id '" + run_id + "'");
}

void DirectoryStore::save(const std::string& run_id, const CorpusResult& result)
{
    check_run_id(run_id);
    const auto dir = root_ / run_id;
    std::filesystem::create_directories(dir);
    write_file(dir / "result.json", export_result(result, ExportFormat::Json));
    record(run_id, "result", result.setting.label(), result.created_at);
}

void DirectoryStore::save(const std::string& run_id, const SweepRun& run)
{
    check_run_id(run_id);
    const auto dir = root_ / run_id;
    std::filesystem::create_directories(dir);
    write_file(dir / "sweep.json", export_sweep(run));
    record(run_id, "sweep", std::string(to_string(run.granularity)), run.created_at);
}

CorpusResult DirectoryStore::load_result(const std::string& run_id) const
{
    check_run_id(run_id);
    return read_result_dir(root_ / run_id);
}

SweepRun DirectoryStore::load_sweep(const std::string& run_id) const
{
    check_run_id(run_id);
    return read_sweep_dir(root_ / run_id);
}

std::vector<std::string> DirectoryStore::runs() const
{
    std::vector<std::string> ids;
    const auto index_path = root_ / "index.json";
    if (!std::filesystem::exists(index_path))
        return ids;
    const auto index = parse_json(read_file(index_path));
    for (const auto& r : index.at("runs"))
        ids.push_back(r.at("id").get<std::string>());
    return ids;
}

CorpusResult DirectoryStore::read_result_dir(const std::filesystem::path& run_dir)
{
    return import_result(read_file(run_dir / "result.json"));
}

SweepRun DirectoryStore::read_sweep_dir(const std::filesystem::path& run_dir)
{
    return import_sweep(read_file(run_dir / "sweep.json"));
}

std::vector<ImpactRow> top_impact(const CorpusResult& package_level, const CorpusResult& method_level, std::size_t n)
{
    if (package_level.setting.granularity != Granularity::PackageLevel
        || method_level.setting.granularity != Granularity::MethodLevel)
        throw Error(ErrorCode::CorpusMismatch, "expected one package-level and one method-level result");
    if (!(package_level.setting.depth == method_level.setting.depth))
        throw Error(ErrorCode::CorpusMismatch, "results were computed at different depths");
    std::set<std::string> pkg_roots, method_roots;
    for (const auto& v : package_level.verdicts)
        pkg_roots.insert(v.root.to_string());
    for (const auto& v : method_level.verdicts)
        method_roots.insert(v.root.to_string());
    if (pkg_roots != method_roots)
        throw Error(ErrorCode::CorpusMismatch, "results cover different roots");

    struct Tally {
        std::set<std::string> projects;
        std::size_t potential = 0;
        std::size_t actual = 0;
    };
    std::map<std::string, Tally> tally;
    std::size_t pkg_vulnerable = 0, method_vulnerable = 0;
    for (const auto& v : package_level.verdicts) {
        pkg_vulnerable += v.vulnerable ? 1 : 0;
        for (const auto& id : v.advisory_ids())
            ++tally[id].potential;
        for (const auto& f : v.findings)
            tally[f.advisory_id].projects.insert(f.coordinate.project_id());
    }
    for (const auto& v : method_level.verdicts) {
        method_vulnerable += v.vulnerable ? 1 : 0;
        for (const auto& id : v.advisory_ids())
            ++tally[id].actual;
        for (const auto& f : v.findings)
            tally[f.advisory_id].projects.insert(f.coordinate.project_id());
    }

    std::vector<ImpactRow> rows;
    for (const auto& [id, t] : tally) {
        ImpactRow row;
        row.advisory_id = id;
        for (const auto& p : t.projects)
            row.project += (row.project.empty() ? "" : ",") + p;
        row.potentially_affected = t.potential;
        row.actually_affected = t.actual;
        row.proportion_pkg = pkg_vulnerable ? 100.0 * static_cast<double>(t.potential) / static_cast<double>(pkg_vulnerable) : 0.0;
        row.proportion_method
            = method_vulnerable ? 100.0 * static_cast<double>(t.actual) / static_cast<double>(method_vulnerable) : 0.0;
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ImpactRow& a, const ImpactRow& b) {
        return a.potentially_affected > b.potentially_affected;
    });
    if (rows.size() > n)
        rows.resize(n);
    return rows;
}

std::string render_top_impact(const std::vector<ImpactRow>& rows, Depth depth, ExportFormat format)
{
    const auto d = depth.to_string();
    if (format == ExportFormat::Json) {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({ { "advisory_id", r.advisory_id },
                            { "project", r.project },
                            { "potentially_affected", r.potentially_affected },
                            { "actually_affected", r.actually_affected },
                            { "proportion_pkg", r.proportion_pkg },
                            { "proportion_method", r.proportion_method } });
        return json { { "depth", d },
                      { "denominators", "percent of the roots in D_p(" + d + ") and D_m(" + d + ") respectively" },
                      { "rows", arr } }
                   .dump(2)
            + "\n";
    }
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({ r.advisory_id, r.project, std::to_string(r.potentially_affected),
                          std::to_string(r.actually_affected), fixed1(r.proportion_pkg), fixed1(r.proportion_method) });
    std::string out = "# proportions: percent of vulnerable roots in D_p(" + d + ") and D_m(" + d + ")\n";
    return out
        + render_rows({ "CVE ID", "Project", "Potentially Affected", "Actually affected", "D_p(" + d + ") %",
                        "D_m(" + d + ") %" },
                      cells, format);
}

namespace {

std::optional<double> median(std::vector<double> values)
{
    if (values.empty())
        return std::nullopt;
    std::sort(values.begin(), values.end());
    const auto mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

} // namespace

VersionDistribution version_distribution(const AdvisoryCollection& kb, const Registry& registry)
{
    VersionDistribution dist;
    std::vector<double> totals, vulnerables, percents;
    for (const auto& [id, project] : registry.projects()) {
        std::vector<VersionRange> ranges;
        for (const auto* adv : kb.for_project(id))
            for (const auto& ar : adv->affected_ranges)
                if (ar.project_id == id)
                    ranges.push_back(ar.range);
        const auto versions = project.versions();
        const auto av = affected_versions(id, versions, ranges);
        VersionDistributionRow row { id, av.all_versions.size(), av.vulnerable_versions.size(), 0.0 };
        if (row.total)
            row.percent = 100.0 * static_cast<double>(row.vulnerable) / static_cast<double>(row.total);
        if (row.vulnerable) {
            totals.push_back(static_cast<double>(row.total));
            vulnerables.push_back(static_cast<double>(row.vulnerable));
            percents.push_back(row.percent);
        }
        dist.rows.push_back(std::move(row));
    }
    for (const auto& p : kb.projects())
        if (!registry.find(p))
            dist.missing_projects.push_back(p);
    dist.median_total = median(totals);
    dist.median_vulnerable = median(vulnerables);
    dist.median_percent = median(percents);
    return dist;
}

std::string render_version_distribution(const VersionDistribution& dist, ExportFormat format)
{
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    if (format == ExportFormat::Json) {
        json arr = json::array();
        for (const auto& r : dist.rows)
            arr.push_back({ { "project", r.project }, { "total", r.total }, { "vulnerable", r.vulnerable },
                            { "percent", r.percent } });
        return json { { "rows", arr },
                      { "median_total", opt(dist.median_total) },
                      { "median_vulnerable", opt(dist.median_vulnerable) },
                      { "median_percent", opt(dist.median_percent) },
                      { "missing_projects", dist.missing_projects } }
                   .dump(2)
            + "\n";
    }
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : dist.rows)
        cells.push_back({ r.project, std::to_string(r.total), std::to_string(r.vulnerable), fixed1(r.percent) });
    auto out = render_rows({ "project", "total", "vulnerable", "percent" }, cells, format);
    auto m = [](const std::optional<double>& v) { return v ? fixed1(*v) : std::string("undefined"); };
    out += "# median over projects with vulnerable releases: total=" + m(dist.median_total)
        + " vulnerable=" + m(dist.median_vulnerable) + " percent=" + m(dist.median_percent) + "\n";
    return out;
}

} // namespace sca
