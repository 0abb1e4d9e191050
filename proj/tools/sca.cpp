#include <sca/advisory.hpp>
#include <sca/callgraph.hpp>
#include <sca/dependency.hpp>
#include <sca/engine.hpp>
#include <sca/error.hpp>
#include <sca/fixtures.hpp>
#include <sca/reachability.hpp>
#include <sca/report.hpp>
#include <sca/version.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int exit_error = 2;

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw sca::Error(sca::ErrorCode::Io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& p, const std::string& content)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw sca::Error(sca::ErrorCode::Io, "cannot write " + p.string());
    out << content;
}

std::string opt_num(const std::optional<int>& v)
{
    return v ? std::to_string(*v) : "undated";
}

// Restricts a resolved graph to the root and its dependencies within k.
sca::DependencyGraph restrict(const sca::DependencyGraph& g, sca::Depth k)
{
    if (k.is_max())
        return g;
    auto nodes = sca::depth_limit(g, k);
    std::set<std::string> keep { g.root().to_string() };
    for (const auto& n : nodes)
        keep.insert(n.to_string());
    nodes.push_back(g.root());
    std::vector<std::pair<sca::Coordinate, sca::Coordinate>> edges;
    for (const auto& [from, to] : g.edges())
        if (keep.count(from) && keep.count(to))
            edges.emplace_back(sca::Coordinate::parse(from), sca::Coordinate::parse(to));
    return sca::DependencyGraph::from_edges(g.root(), nodes, edges);
}

struct Sources {
    std::string corpus;
    std::string registry;
    std::string advisories;
    std::string graphs;
    std::string patches;

    void bind(CLI::App* app)
    {
        app->add_option("--corpus", corpus, "Corpus directory with registry/, advisories/, graphs/, patches/");
        app->add_option("--registry", registry, "Registry directory");
        app->add_option("--advisories", advisories, "Advisory directory");
        app->add_option("--graphs", graphs, "Call graph directory");
        app->add_option("--patches", patches, "Patch manifest directory");
    }

    sca::WorkspacePaths paths() const
    {
        sca::WorkspacePaths p;
        if (!corpus.empty())
            p = sca::WorkspacePaths::corpus(corpus);
        if (!registry.empty())
            p.registry = registry;
        if (!advisories.empty())
            p.advisories = advisories;
        if (!graphs.empty())
            p.graphs = graphs;
        if (!patches.empty())
            p.patches = patches;
        if (p.registry.empty() || p.advisories.empty())
            throw CLI::ValidationError("--registry and --advisories (or --corpus) are required");
        return p;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Software composition analysis with method-level vulnerability reachability" };
    app.require_subcommand(1);
    int exit_code = 0;

    // kb
    auto* kb = app.add_subcommand("kb", "Advisory knowledge base");
    kb->require_subcommand(1);
    std::string kb_dir, kb_emit;
    auto* kb_load = kb->add_subcommand("load", "Load and validate an advisory directory");
    kb_load->add_option("--dir", kb_dir, "Advisory directory")->required();
    kb_load->add_option("--emit", kb_emit, "Write normalized documents to this directory");
    kb_load->callback([&] {
        const auto kbase = sca::AdvisoryCollection::load_directory(kb_dir);
        if (!kb_emit.empty())
            for (const auto& a : kbase.all())
                spill(fs::path(kb_emit) / (a.id + ".json"), sca::emit_normalized(a));
        std::cout << "loaded " << kbase.size() << " advisories covering " << kbase.projects().size() << " projects\n";
    });

    std::string stats_by = "year", stats_format = "table";
    std::size_t stats_top = 10;
    bool stats_unified = false;
    auto* kb_stats = kb->add_subcommand("stats", "Advisory statistics");
    kb_stats->add_option("--dir", kb_dir, "Advisory directory")->required();
    kb_stats->add_option("--by", stats_by, "year|severity|cwe")->check(CLI::IsMember({ "year", "severity", "cwe" }));
    kb_stats->add_option("--top", stats_top, "Rows for --by cwe")->check(CLI::PositiveNumber);
    kb_stats->add_option("--format", stats_format, "json|tsv|table")->check(CLI::IsMember({ "json", "tsv", "table" }));
    kb_stats->add_flag("--unified", stats_unified, "Fold Moderate into Medium");
    kb_stats->callback([&] {
        const auto kbase = sca::AdvisoryCollection::load_directory(kb_dir);
        const bool as_json = stats_format == "json";
        const bool as_tsv = stats_format == "tsv";
        std::vector<std::vector<std::string>> cells;
        auto print_cells = [&](const std::vector<std::string>& header) {
            if (as_tsv)
                cells.insert(cells.begin(), header);
            for (const auto& row : cells) {
                std::string line;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (as_tsv)
                        line += (i ? "\t" : "") + row[i];
                    else
                        line += (i ? " " : "") + (row[i] + std::string(row[i].size() < 10 ? 10 - row[i].size() : 0, ' '));
                }
                while (!as_tsv && !line.empty() && line.back() == ' ')
                    line.pop_back();
                std::cout << line << "\n";
            }
        };
        if (stats_by == "year") {
            json rows = json::array();
            for (const auto& r : sca::stats_by_year(kbase)) {
                rows.push_back({ { "year", r.year ? json(*r.year) : json(nullptr) },
                                 { "advisories", r.advisories },
                                 { "affected_projects", r.affected_projects } });
                cells.push_back({ opt_num(r.year), std::to_string(r.advisories), std::to_string(r.affected_projects) });
            }
            if (as_json)
                std::cout << rows.dump(2) << "\n";
            else
                print_cells({ "year", "advisories", "affected_projects" });
        } else if (stats_by == "severity") {
            const auto table = sca::stats_by_year_and_severity(kbase, stats_unified);
            json rows = json::array();
            for (const auto& r : table.rows) {
                const std::string sev(sca::to_string(r.severity));
                rows.push_back({ { "year", r.year ? json(*r.year) : json(nullptr) }, { "severity", sev }, { "count", r.count } });
                cells.push_back({ opt_num(r.year), sev, std::to_string(r.count) });
            }
            if (as_json) {
                std::cout << json { { "rows", rows }, { "unknown_severity", table.unknown_severity } }.dump(2) << "\n";
            } else {
                print_cells({ "year", "severity", "count" });
                std::printf("# unknown severity: %zu\n", table.unknown_severity);
            }
        } else {
            const auto table = sca::cwe_frequency(kbase, stats_top, stats_unified);
            json rows = json::array();
            for (const auto& r : table.rows) {
                json sev = json::object();
                for (const auto& [s, c] : r.by_severity)
                    sev[std::string(sca::to_string(s))] = c;
                rows.push_back({ { "cwe", r.cwe_id }, { "count", r.count }, { "by_severity", sev } });
                cells.push_back({ r.cwe_id, std::to_string(r.count) });
            }
            if (as_json) {
                std::cout << json { { "rows", rows }, { "excluded_without_cwe", table.excluded_without_cwe } }.dump(2)
                          << "\n";
            } else {
                print_cells({ "cwe", "count" });
                std::printf("# excluded without CWE: %zu\n", table.excluded_without_cwe);
            }
        }
    });

    // affected-versions
    std::string av_project, av_releases, av_advisories;
    auto* av = app.add_subcommand("affected-versions", "Releases of a project matched by its advisories");
    av->add_option("--project", av_project, "group:artifact")->required();
    av->add_option("--releases", av_releases, "File with one version per line")->required();
    av->add_option("--advisories", av_advisories, "Advisory directory")->required();
    av->callback([&] {
        const auto kbase = sca::AdvisoryCollection::load_directory(av_advisories);
        std::vector<sca::PackageVersion> releases;
        std::istringstream lines(slurp(av_releases));
        for (std::string line; std::getline(lines, line);) {
            const auto a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos)
                continue;
            releases.push_back(sca::parse_version(line.substr(a, line.find_last_not_of(" \t\r") - a + 1)));
        }
        std::vector<sca::VersionRange> ranges;
        for (const auto* adv : kbase.for_project(av_project))
            for (const auto& r : adv->affected_ranges)
                if (r.project_id == av_project)
                    ranges.push_back(r.range);
        const auto result = sca::affected_versions(av_project, releases, ranges);
        json vulnerable = json::array();
        for (const auto& v : result.vulnerable_versions)
            vulnerable.push_back(v.original());
        std::cout << json { { "project", av_project }, { "vulnerable", vulnerable }, { "total", result.all_versions.size() } }
                         .dump(2)
                  << "\n";
    });

    // resolve
    std::string rs_root, rs_registry, rs_depth = "max", rs_format = "json";
    bool rs_all = false;
    auto* rs = app.add_subcommand("resolve", "Resolve the dependency graph of a root");
    rs->add_option("--root", rs_root, "group:artifact:version")->required();
    rs->add_option("--registry", rs_registry, "Registry directory")->required();
    rs->add_option("--depth", rs_depth, "N or max");
    rs->add_option("--format", rs_format, "json|tree")->check(CLI::IsMember({ "json", "tree" }));
    rs->add_flag("--all-scopes", rs_all, "Keep test/provided scopes and optional dependencies");
    rs->callback([&] {
        const auto registry = sca::Registry::load_directory(rs_registry);
        const auto g = sca::resolve(sca::Coordinate::parse(rs_root), registry, sca::ResolveOptions { rs_all });
        for (const auto& w : g.warnings())
            std::cerr << "warning: " << w << "\n";
        const auto depth = sca::Depth::parse(rs_depth);
        std::cout << (rs_format == "tree" ? sca::render_tree(g, depth) : restrict(g, depth).to_json() + "\n");
    });

    // stitch
    std::string st_root, st_graphs, st_deps, st_depth = "max", st_out;
    auto* st = app.add_subcommand("stitch", "Stitch the whole-program call graph of a resolved root");
    st->add_option("--root", st_root, "group:artifact:version")->required();
    st->add_option("--graphs", st_graphs, "Call graph directory")->required();
    st->add_option("--deps", st_deps, "Resolved graph JSON")->required();
    st->add_option("--depth", st_depth, "N or max");
    st->add_option("--out", st_out, "Output file")->required();
    st->callback([&] {
        const auto graphs = sca::GraphStore::load_directory(st_graphs);
        const auto resolved = sca::DependencyGraph::from_json(slurp(st_deps));
        const auto root = sca::Coordinate::parse(st_root);
        if (!(resolved.root() == root))
            throw sca::Error(sca::ErrorCode::MalformedGraph, "resolved graph is rooted at " + resolved.root().to_string());
        const auto* root_cg = graphs.find(root);
        if (!root_cg)
            throw sca::Error(sca::ErrorCode::MalformedGraph, "no call graph for " + st_root);
        std::vector<sca::PackageCallGraph> deps;
        for (const auto& d : sca::depth_limit(resolved, sca::Depth::parse(st_depth))) {
            if (const auto* cg = graphs.find(d))
                deps.push_back(*cg);
            else
                std::cerr << "warning: no call graph for " << d.to_string() << "\n";
        }
        const auto result = sca::stitch(*root_cg, deps, resolved);
        spill(st_out, result.graph.to_json());
        std::cerr << result.graph.nodes().size() << " nodes, " << result.graph.edge_count() << " edges, "
                  << result.unresolved.size() << " unresolved calls\n";
    });

    // analyze
    Sources an_src;
    std::string an_root, an_level = "method", an_depth = "max", an_format = "table", an_deps;
    bool an_all = false;
    auto* an = app.add_subcommand("analyze", "Analyze one root; exit 0 clean, 1 vulnerable, 2 error");
    an->add_option("--root", an_root, "group:artifact:version")->required();
    an->add_option("--level", an_level, "package|method")->check(CLI::IsMember({ "package", "method" }));
    an->add_option("--depth", an_depth, "N or max");
    an->add_option("--format", an_format, "json|table")->check(CLI::IsMember({ "json", "table" }));
    an->add_option("--deps", an_deps, "Pre-resolved graph JSON used instead of the resolver");
    an->add_flag("--all-scopes", an_all, "Keep test/provided scopes and optional dependencies");
    an_src.bind(an);
    an->callback([&] {
        const auto ws = sca::Workspace::load(an_src.paths());
        const sca::Analyzer analyzer(ws, sca::ResolveOptions { an_all });
        for (const auto& w : analyzer.mark_warnings())
            std::cerr << "warning: " << w << "\n";
        const sca::AnalysisSetting setting { sca::parse_granularity(an_level), sca::Depth::parse(an_depth) };
        const auto root = sca::Coordinate::parse(an_root);
        sca::RunDiagnostics diag;
        sca::RootVerdict verdict;
        if (!an_deps.empty()) {
            const auto resolved = sca::DependencyGraph::from_json(slurp(an_deps));
            if (!(resolved.root() == root))
                throw sca::Error(sca::ErrorCode::MalformedGraph, "resolved graph is rooted at " + resolved.root().to_string());
            verdict = analyzer.analyze(resolved, setting, &diag);
        } else {
            verdict = analyzer.analyze(root, setting, &diag);
        }
        std::cout << sca::export_verdict(verdict, sca::parse_export_format(an_format));
        if (diag.unresolved_calls || diag.skipped_packages || diag.unmatched_marks)
            std::cerr << "diagnostics: " << diag.unresolved_calls << " unresolved calls, " << diag.skipped_packages
                      << " packages without call graph, " << diag.unmatched_marks << " unmatched marks\n";
        exit_code = verdict.vulnerable ? 1 : 0;
    });

    // run / sweep
    Sources run_src;
    std::string run_roots, run_level = "method", run_depth = "max", run_store, run_id, run_created, run_depths;
    unsigned run_workers = std::max(1u, std::thread::hardware_concurrency());
    bool run_all = false;
    auto bind_run = [&](CLI::App* cmd) {
        run_src.bind(cmd);
        cmd->add_option("--roots", run_roots, "File with one root coordinate per line")->required();
        cmd->add_option("--level", run_level, "package|method")->check(CLI::IsMember({ "package", "method" }));
        cmd->add_option("--workers", run_workers, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--store", run_store, "Result store directory")->required();
        cmd->add_option("--id", run_id, "Run id")->required();
        cmd->add_option("--created-at", run_created, "UTC timestamp, default SOURCE_DATE_EPOCH or now");
        cmd->add_flag("--all-scopes", run_all, "Keep test/provided scopes and optional dependencies");
    };
    auto created_at = [&] {
        return run_created.empty() ? sca::default_created_at() : sca::parse_timestamp(run_created);
    };
    auto* run = app.add_subcommand("run", "Analyze a root corpus and store the result");
    bind_run(run);
    run->add_option("--depth", run_depth, "N or max");
    run->callback([&] {
        const auto ws = sca::Workspace::load(run_src.paths());
        const sca::Analyzer analyzer(ws, sca::ResolveOptions { run_all });
        const auto roots = sca::read_roots(run_roots);
        const sca::AnalysisSetting setting { sca::parse_granularity(run_level), sca::Depth::parse(run_depth) };
        const auto result = analyzer.run_corpus(roots, setting, run_workers, created_at());
        sca::DirectoryStore(run_store).save(run_id, result);
        std::size_t vulnerable = 0;
        for (const auto& v : result.verdicts)
            vulnerable += v.vulnerable ? 1 : 0;
        std::cout << run_id << ": " << setting.label() << " " << vulnerable << "/" << result.verdicts.size()
                  << " roots vulnerable, " << result.diagnostics.failed_roots << " failed\n";
    });

    auto* sweep = app.add_subcommand("sweep", "Depth sweep over a root corpus");
    bind_run(sweep);
    run_depths = "1,2,3,4,5,max";
    sweep->add_option("--depths", run_depths, "Comma separated ascending depths");
    sweep->callback([&] {
        const auto ws = sca::Workspace::load(run_src.paths());
        const sca::Analyzer analyzer(ws, sca::ResolveOptions { run_all });
        const auto roots = sca::read_roots(run_roots);
        std::vector<sca::Depth> depths;
        std::istringstream parts(run_depths);
        for (std::string part; std::getline(parts, part, ',');)
            depths.push_back(sca::Depth::parse(part));
        const auto result = analyzer.run_sweep(roots, depths, sca::parse_granularity(run_level), run_workers, created_at());
        sca::DirectoryStore(run_store).save(run_id, result);
        std::cout << run_id << ": swept " << result.roots.size() << " roots over " << depths.size() << " depths\n";
    });

    // report
    auto* report = app.add_subcommand("report", "Corpus reports");
    report->require_subcommand(1);
    std::vector<std::string> rp_runs;
    std::size_t rp_top = 10;
    std::string rp_format = "table", rp_run, rp_advisories, rp_registry;
    auto* top = report->add_subcommand("top-impact", "Advisories affecting the most roots");
    top->add_option("--runs", rp_runs, "Package-level run directory, then method-level run directory")
        ->required()
        ->expected(2);
    top->add_option("--top", rp_top, "Rows")->check(CLI::PositiveNumber);
    top->add_option("--format", rp_format, "json|tsv|table");
    top->callback([&] {
        const auto pkg = sca::DirectoryStore::read_result_dir(rp_runs.at(0));
        const auto method = sca::DirectoryStore::read_result_dir(rp_runs.at(1));
        std::cout << sca::render_top_impact(sca::top_impact(pkg, method, rp_top), pkg.setting.depth,
                                            sca::parse_export_format(rp_format));
    });
    auto* curve = report->add_subcommand("coverage-curve", "Share of max-depth vulnerable roots found at each depth");
    curve->add_option("--run", rp_run, "Sweep run directory")->required();
    curve->add_option("--format", rp_format, "json|tsv|table");
    curve->callback([&] {
        const auto sweep_run = sca::DirectoryStore::read_sweep_dir(rp_run);
        std::cout << sca::render_coverage_curve(sca::coverage_curve(sca::sweep_corpus(sweep_run)),
                                                sca::parse_export_format(rp_format));
    });
    auto* dist = report->add_subcommand("version-dist", "Vulnerable releases per project");
    dist->add_option("--advisories", rp_advisories, "Advisory directory")->required();
    dist->add_option("--registry", rp_registry, "Registry directory")->required();
    dist->add_option("--format", rp_format, "json|tsv|table");
    dist->callback([&] {
        const auto kbase = sca::AdvisoryCollection::load_directory(rp_advisories);
        const auto registry = sca::Registry::load_directory(rp_registry);
        std::cout << sca::render_version_distribution(sca::version_distribution(kbase, registry),
                                                      sca::parse_export_format(rp_format));
    });

    // fixtures
    auto* fixtures = app.add_subcommand("fixtures", "Synthetic corpora");
    fixtures->require_subcommand(1);
    sca::CorpusSpec spec;
    std::string fx_out, fx_preset;
    auto* gen = fixtures->add_subcommand("generate", "Generate a corpus");
    gen->add_option("--seed", spec.seed, "Random seed");
    gen->add_option("--out", fx_out, "Output directory (absent or empty)")->required();
    gen->add_option("--preset", fx_preset, "figure1")->check(CLI::IsMember({ "figure1" }));
    gen->add_option("--projects", spec.project_count, "Project count");
    gen->add_option("--max-releases", spec.max_releases, "Releases per project, at most");
    gen->add_option("--max-direct-deps", spec.max_direct_deps, "Direct dependencies per release, at most");
    gen->add_option("--max-depth", spec.max_depth_target, "Dependency layers below the shallowest");
    gen->add_option("--vulnerability-rate", spec.vulnerability_rate, "Share of projects with an advisory");
    gen->add_option("--call-density", spec.call_density, "Call probability");
    gen->add_option("--roots", spec.root_count, "Roots listed in roots.txt");
    gen->callback([&] {
        const auto summary = fx_preset == "figure1" ? sca::generate_figure1(fx_out) : sca::generate(spec, fx_out);
        std::cout << summary.projects << " projects, " << summary.releases << " releases, " << summary.advisories
                  << " advisories, " << summary.roots << " roots\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_code;
}
