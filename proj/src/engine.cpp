#include <sca/engine.hpp>

#include <sca/error.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace sca {

WorkspacePaths WorkspacePaths::corpus(const std::filesystem::path& dir)
{
    WorkspacePaths p;
    p.registry = dir / "registry";
    p.advisories = dir / "advisories";
    if (std::filesystem::is_directory(dir / "graphs"))
        p.graphs = dir / "graphs";
    if (std::filesystem::is_directory(dir / "patches"))
        p.patches = dir / "patches";
    return p;
}

Workspace Workspace::load(const WorkspacePaths& paths)
{
    Workspace ws;
    ws.registry = Registry::load_directory(paths.registry);
    ws.advisories = AdvisoryCollection::load_directory(paths.advisories);
    if (paths.graphs)
        ws.graphs = GraphStore::load_directory(*paths.graphs);
    if (paths.patches)
        ws.patches = load_patch_manifests(*paths.patches);
    return ws;
}

MarkReport build_vulnerability_marks(const Workspace& ws)
{
    MarkReport report;
    auto warn = [&report](const PatchManifest& m, const std::string& what) {
        report.warnings.push_back(m.advisory_id + " (" + m.project_id + "): " + what);
    };
    std::map<std::string, std::map<PackageVersion, CallableIndex>> index_cache;

    for (const auto& manifest : ws.patches) {
        const auto* advisory = ws.advisories.find(manifest.advisory_id);
        if (!advisory) {
            warn(manifest, "no such advisory");
            continue;
        }
        const auto* project = ws.registry.find(manifest.project_id);
        if (!project) {
            warn(manifest, "project not in registry");
            continue;
        }
        auto [cached, fresh] = index_cache.try_emplace(manifest.project_id);
        auto& indices = cached->second;
        if (fresh) {
            for (const auto& v : project->versions()) {
                const auto* cg = ws.graphs.find(project->project_id + ":" + v.original());
                if (!cg)
                    continue;
                try {
                    indices.emplace(v, CallableIndex::from_graph(*cg));
                } catch (const Error& e) {
                    warn(manifest, e.what());
                }
            }
        }
        auto index_of = [&indices](const PackageVersion& v) -> const CallableIndex* {
            auto it = indices.find(v);
            return it == indices.end() ? nullptr : &it->second;
        };
        const auto* fp = index_of(manifest.first_patched);
        const auto* lv = index_of(manifest.last_vulnerable);
        if (!fp || !lv) {
            warn(manifest, "no call graph for the patch versions");
            continue;
        }

        PatchCommit commit;
        try {
            commit = load_patch_commit(manifest);
        } catch (const Error& e) {
            warn(manifest, e.what());
            continue;
        }
        const auto signatures = locate_vulnerable_callables(commit.file_diffs, *fp, *lv);
        if (signatures.empty()) {
            warn(manifest, "patch touches no callable");
            continue;
        }

        std::vector<VersionRange> ranges;
        for (const auto& ar : advisory->affected_ranges)
            if (ar.project_id == manifest.project_id)
                ranges.push_back(ar.range);
        const auto versions = project->versions();
        const auto affected = affected_versions(manifest.project_id, versions, ranges);
        const auto propagation = propagate_to_affected_versions(signatures, affected, indices);
        for (const auto& v : propagation.missing_versions)
            warn(manifest, "no call graph for affected version " + v.original());
        for (const auto& [version, sigs] : propagation.by_version) {
            auto& by_sig = report.marks[manifest.project_id + ":" + version.original()];
            for (const auto& s : sigs)
                by_sig[s].insert(manifest.advisory_id);
        }
    }
    return report;
}

std::vector<Coordinate> read_roots(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read " + file.string());
    std::vector<Coordinate> roots;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto last = line.find_last_not_of(" \t\r");
        roots.push_back(Coordinate::parse(line.substr(first, last - first + 1)));
    }
    return roots;
}

Analyzer::Analyzer(const Workspace& ws, ResolveOptions options)
    : ws_(ws)
    , options_(options)
    , marks_(build_vulnerability_marks(ws))
{
}

WholeProgramGraph Analyzer::whole_program(const DependencyGraph& resolved, Depth k, RunDiagnostics* diagnostics) const
{
    RunDiagnostics local;
    WholeProgramGraph whole;
    const auto* root_cg = ws_.graphs.find(resolved.root());
    const auto deps = depth_limit(resolved, k);
    if (!root_cg) {
        local.skipped_packages += 1 + deps.size();
    } else {
        std::vector<PackageCallGraph> dep_graphs;
        VulnerabilityMarks included;
        for (const auto& d : deps) {
            const auto key = d.to_string();
            if (const auto* cg = ws_.graphs.find(d))
                dep_graphs.push_back(*cg);
            else
                ++local.skipped_packages;
            if (auto it = marks_.marks.find(key); it != marks_.marks.end())
                included.insert(*it);
        }
        auto stitched = stitch(*root_cg, dep_graphs, resolved);
        local.unresolved_calls += stitched.unresolved.size();
        auto annotated = annotate_vulnerable(std::move(stitched.graph), included);
        local.unmatched_marks += annotated.unmatched_marks;
        whole = std::move(annotated.graph);
    }
    if (diagnostics)
        *diagnostics += local;
    return whole;
}

RootVerdict Analyzer::analyze(const DependencyGraph& resolved, const AnalysisSetting& setting,
                              RunDiagnostics* diagnostics) const
{
    if (setting.granularity == Granularity::PackageLevel)
        return analyze_package_level(resolved, ws_.advisories, setting.depth);
    auto verdict = analyze_method_level(whole_program(resolved, setting.depth, diagnostics), setting.depth);
    verdict.root = resolved.root();
    return verdict;
}

RootVerdict Analyzer::analyze(const Coordinate& root, const AnalysisSetting& setting, RunDiagnostics* diagnostics) const
{
    return analyze(resolve(root, ws_.registry, options_), setting, diagnostics);
}

std::vector<SweepEntry> Analyzer::depth_sweep(const Coordinate& root, std::span<const Depth> k_values,
                                              Granularity granularity, RunDiagnostics* diagnostics) const
{
    for (std::size_t i = 1; i < k_values.size(); ++i)
        if (!(k_values[i - 1] < k_values[i]))
            throw std::invalid_argument("depth sweep values must be strictly ascending");
    const auto resolved = resolve(root, ws_.registry, options_);
    const int deepest = max_depth(resolved);
    std::vector<SweepEntry> entries;
    std::set<std::string> previous;
    for (const auto& k : k_values) {
        SweepEntry e;
        e.depth = k;
        e.verdict = analyze(resolved, AnalysisSetting { granularity, k }, diagnostics);
        const auto ids = e.verdict.advisory_ids();
        e.cumulative_advisories = ids.size();
        e.exact_level_advisories = static_cast<std::size_t>(
            std::count_if(ids.begin(), ids.end(), [&previous](const std::string& id) { return !previous.count(id); }));
        e.root_max_depth = deepest;
        previous = { ids.begin(), ids.end() };
        entries.push_back(std::move(e));
    }
    return entries;
}

namespace {

std::vector<Coordinate> sorted_unique(std::span<const Coordinate> roots)
{
    std::vector<Coordinate> out(roots.begin(), roots.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Runs job(i) for every index on up to `workers` threads. Each slot is written
// by exactly one thread, so output order never depends on scheduling.
template <typename Job>
void parallel_for(std::size_t count, unsigned workers, Job job)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next { 0 };
    auto loop = [&] {
        for (auto i = next.fetch_add(1); i < count; i = next.fetch_add(1))
            job(i);
    };
    if (workers == 1) {
        loop();
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(loop);
    for (auto& t : pool)
        t.join();
}

} // namespace

CorpusResult Analyzer::run_corpus(std::span<const Coordinate> roots, const AnalysisSetting& setting, unsigned workers,
                                  Timestamp created_at) const
{
    const auto ordered = sorted_unique(roots);
    std::vector<std::optional<RootVerdict>> verdicts(ordered.size());
    std::vector<RunDiagnostics> diags(ordered.size());
    parallel_for(ordered.size(), workers, [&](std::size_t i) {
        try {
            verdicts[i] = analyze(ordered[i], setting, &diags[i]);
        } catch (const Error&) {
            diags[i].failed_roots = 1;
        }
    });

    CorpusResult result;
    result.created_at = created_at;
    result.setting = setting;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        result.diagnostics += diags[i];
        if (verdicts[i])
            result.verdicts.push_back(std::move(*verdicts[i]));
    }
    return result;
}

SweepRun Analyzer::run_sweep(std::span<const Coordinate> roots, std::span<const Depth> k_values, Granularity granularity,
                             unsigned workers, Timestamp created_at) const
{
    const auto ordered = sorted_unique(roots);
    std::vector<std::optional<SweepRoot>> swept(ordered.size());
    std::vector<RunDiagnostics> diags(ordered.size());
    parallel_for(ordered.size(), workers, [&](std::size_t i) {
        try {
            SweepRoot r;
            r.root = ordered[i];
            r.entries = depth_sweep(ordered[i], k_values, granularity, &diags[i]);
            r.max_depth = r.entries.empty() ? 0 : r.entries.front().root_max_depth;
            swept[i] = std::move(r);
        } catch (const Error&) {
            diags[i].failed_roots = 1;
        }
    });

    SweepRun run;
    run.created_at = created_at;
    run.granularity = granularity;
    run.depths.assign(k_values.begin(), k_values.end());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        run.diagnostics += diags[i];
        if (swept[i])
            run.roots.push_back(std::move(*swept[i]));
    }
    return run;
}

} // namespace sca
