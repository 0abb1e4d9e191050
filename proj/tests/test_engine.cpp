#include "support.hpp"

#include <sca/engine.hpp>
#include <sca/fixtures.hpp>

#include <doctest.h>

using namespace sca;

namespace {

struct Figure1Workspace {
    testing::TempDir dir;
    Workspace ws;
    Figure1Workspace()
    {
        generate_figure1(dir / "fig");
        ws = Workspace::load(WorkspacePaths::corpus(dir / "fig"));
    }
};

const Coordinate kRoot = Coordinate::parse("fig1:A:1.0");

std::vector<std::string> signatures(const VulnerableCallChain& c)
{
    std::vector<std::string> out;
    for (const auto& s : c.path)
        out.push_back(s.signature);
    return out;
}

} // namespace

TEST_SUITE("engine")
{
    TEST_CASE("the example is reachable only with the transitive dependency")
    {
        Figure1Workspace f;
        const Analyzer analyzer(f.ws);

        RunDiagnostics d1;
        const auto shallow = analyzer.analyze(kRoot, { Granularity::MethodLevel, Depth::of(1) }, &d1);
        CHECK(!shallow.vulnerable);
        CHECK(d1.unresolved_calls == 1);

        for (const auto& k : { Depth::of(2), Depth::max() }) {
            RunDiagnostics d;
            const auto v = analyzer.analyze(kRoot, { Granularity::MethodLevel, k }, &d);
            REQUIRE(v.findings.size() == 1);
            const auto& f0 = v.findings[0];
            CHECK(f0.advisory_id == "FIG1-0001");
            CHECK(f0.coordinate.to_string() == "fig1:C:1.0");
            REQUIRE(f0.chain);
            CHECK(signatures(*f0.chain) == std::vector<std::string> { "A.Foo()", "B.Bar()", "C.Zeta()" });
            CHECK(f0.chain->length() == 2);
            CHECK(d.unresolved_calls == 0);
        }

        // Main reaches the same node one step further out.
        const auto whole = analyzer.whole_program(resolve(kRoot, f.ws.registry), Depth::max());
        std::map<std::string, GlobalId> id;
        for (GlobalId i = 0; i < whole.nodes().size(); ++i)
            id[whole.nodes()[i].signature] = i;
        const std::vector<std::string> main_chain { "A.Main()", "A.Foo()", "B.Bar()", "C.Zeta()" };
        for (std::size_t i = 0; i + 1 < main_chain.size(); ++i) {
            bool found = false;
            for (const auto& e : whole.edges_from(id.at(main_chain[i])))
                found = found || e.target == id.at(main_chain[i + 1]);
            CHECK_MESSAGE(found, main_chain[i], " -> ", main_chain[i + 1]);
        }
        CHECK(whole.vulnerable().size() == 1);

        CHECK(!analyzer.analyze(kRoot, { Granularity::PackageLevel, Depth::of(1) }).vulnerable);
        const auto pkg = analyzer.analyze(kRoot, { Granularity::PackageLevel, Depth::of(2) });
        REQUIRE(pkg.findings.size() == 1);
        CHECK(!pkg.findings[0].chain);
    }

    TEST_CASE("depth sweep over the example")
    {
        Figure1Workspace f;
        const Analyzer analyzer(f.ws);
        const std::vector<Depth> ks { Depth::of(1), Depth::of(2), Depth::of(3), Depth::max() };
        for (auto gran : { Granularity::MethodLevel, Granularity::PackageLevel }) {
            const auto sweep = analyzer.depth_sweep(kRoot, ks, gran);
            REQUIRE(sweep.size() == 4);
            CHECK(sweep[0].cumulative_advisories == 0);
            CHECK(sweep[1].cumulative_advisories == 1);
            CHECK(sweep[1].exact_level_advisories == 1);
            CHECK(sweep[2].exact_level_advisories == 0);
            CHECK(sweep[3].cumulative_advisories == 1);
            CHECK(sweep[3].verdict.setting.depth.is_max());
            for (const auto& e : sweep)
                CHECK(e.root_max_depth == 2);
            CHECK(sweep[2].verdict.findings == sweep[3].verdict.findings);
        }
        const std::vector<Depth> unordered { Depth::of(2), Depth::of(1) };
        CHECK_THROWS_AS(analyzer.depth_sweep(kRoot, unordered, Granularity::MethodLevel), std::invalid_argument);
        const std::vector<Depth> repeated { Depth::of(1), Depth::of(1) };
        CHECK_THROWS_AS(analyzer.depth_sweep(kRoot, repeated, Granularity::MethodLevel), std::invalid_argument);
    }

    TEST_CASE("corpus runs are ordered and count failures")
    {
        Figure1Workspace f;
        const Analyzer analyzer(f.ws);
        const std::vector<Coordinate> roots { Coordinate::parse("fig1:B:1.0"), kRoot, Coordinate::parse("fig1:A:9.9"),
                                              kRoot, Coordinate::parse("nope:x:1") };
        const auto t = parse_timestamp("2024-02-02T00:00:00Z");
        const auto r = analyzer.run_corpus(roots, { Granularity::MethodLevel, Depth::max() }, 3, t);
        REQUIRE(r.verdicts.size() == 2);
        CHECK(r.verdicts[0].root == kRoot);
        CHECK(r.verdicts[1].root.to_string() == "fig1:B:1.0");
        CHECK(r.verdicts[0].vulnerable);
        CHECK(r.verdicts[1].vulnerable);
        CHECK(r.diagnostics.failed_roots == 2);
        CHECK(r.created_at == t);
        CHECK(export_result(analyzer.run_corpus(roots, r.setting, 1, t), ExportFormat::Json)
              == export_result(r, ExportFormat::Json));

        const std::vector<Depth> ks { Depth::of(1), Depth::max() };
        const auto sweep = analyzer.run_sweep(roots, ks, Granularity::PackageLevel, 2, t);
        REQUIRE(sweep.roots.size() == 2);
        CHECK(sweep.diagnostics.failed_roots == 2);
        const auto curve = coverage_curve(sweep_corpus(sweep));
        REQUIRE(curve.size() == 2);
        CHECK(*curve[0].ratio == doctest::Approx(0.5));
        CHECK(*curve[1].ratio == 1.0);
    }

    TEST_CASE("method findings are a subset of package findings")
    {
        testing::TempDir dir;
        CorpusSpec spec;
        spec.seed = 4;
        spec.project_count = 40;
        spec.root_count = 30;
        generate(spec, dir / "c");
        const auto ws = Workspace::load(WorkspacePaths::corpus(dir / "c"));
        const Analyzer analyzer(ws);
        const auto roots = read_roots(dir / "c/roots.txt");
        for (const auto& root : roots) {
            for (const auto& k : { Depth::of(1), Depth::of(2), Depth::of(4), Depth::max() }) {
                const auto p = analyzer.analyze(root, { Granularity::PackageLevel, k });
                const auto m = analyzer.analyze(root, { Granularity::MethodLevel, k });
                std::set<std::pair<std::string, std::string>> pkg;
                for (const auto& x : p.findings)
                    pkg.emplace(x.advisory_id, x.coordinate.to_string());
                for (const auto& x : m.findings)
                    CHECK(pkg.count({ x.advisory_id, x.coordinate.to_string() }) == 1);
                if (m.vulnerable)
                    CHECK(p.vulnerable);
            }
        }
    }

    TEST_CASE("roots files")
    {
        testing::TempDir dir;
        testing::write_text(dir / "roots.txt", "# corpus\n\ng:a:1\n  g:b:2  \n# g:c:3\n");
        const auto roots = read_roots(dir / "roots.txt");
        REQUIRE(roots.size() == 2);
        CHECK(roots[1].to_string() == "g:b:2");
        CHECK(testing::code_of([&] { read_roots(dir / "absent.txt"); }) == ErrorCode::Io);
    }
}
