#include "support.hpp"

#include <sca/advisory.hpp>
#include <sca/callgraph.hpp>
#include <sca/dependency.hpp>
#include <sca/engine.hpp>
#include <sca/fixtures.hpp>

#include <doctest.h>

using namespace sca;
using testing::code_of;

namespace {

std::map<std::string, std::string> snapshot(const std::filesystem::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file())
            files[std::filesystem::relative(e.path(), root).string()] = testing::read_text(e.path());
    return files;
}

CorpusSpec small_spec(std::uint64_t seed)
{
    CorpusSpec s;
    s.seed = seed;
    s.project_count = 30;
    s.root_count = 20;
    return s;
}

} // namespace

TEST_SUITE("fixtures")
{
    TEST_CASE("identical specs give identical trees")
    {
        testing::TempDir dir;
        const auto a = generate(small_spec(7), dir / "a");
        const auto b = generate(small_spec(7), dir / "b");
        CHECK(a.projects == 30);
        CHECK(a.roots == 20);
        CHECK(a.releases == b.releases);
        const auto sa = snapshot(dir / "a");
        CHECK(sa == snapshot(dir / "b"));
        generate(small_spec(8), dir / "c");
        CHECK(sa != snapshot(dir / "c"));
    }

    TEST_CASE("generated corpus is consistent")
    {
        testing::TempDir dir;
        const auto g = generate(small_spec(3), dir / "c");
        const auto ws = Workspace::load(WorkspacePaths::corpus(dir / "c"));
        CHECK(ws.registry.projects().size() == g.projects);
        CHECK(ws.advisories.size() == g.advisories);
        CHECK(ws.patches.size() == g.advisories);
        std::size_t releases = 0;
        for (const auto& [id, p] : ws.registry.projects())
            releases += p.releases.size();
        CHECK(releases == g.releases);
        CHECK(ws.graphs.all().size() == g.releases);
        const auto roots = read_roots(dir / "c/roots.txt");
        CHECK(roots.size() == g.roots);
        for (const auto& r : roots)
            CHECK_NOTHROW(resolve(r, ws.registry));
        const auto marks = build_vulnerability_marks(ws);
        CHECK(marks.warnings.empty());
        CHECK(!marks.marks.empty());
    }

    TEST_CASE("no vulnerabilities when the rate is zero")
    {
        testing::TempDir dir;
        auto spec = small_spec(1);
        spec.vulnerability_rate = 0.0;
        const auto g = generate(spec, dir / "c");
        CHECK(g.advisories == 0);
        CHECK(std::filesystem::is_empty(dir / "c/advisories"));
    }

    TEST_CASE("invalid specs")
    {
        testing::TempDir dir;
        auto bad = [&](auto mutate) {
            auto s = small_spec(0);
            mutate(s);
            return code_of([&] { generate(s, dir / "x"); });
        };
        CHECK(bad([](CorpusSpec& s) { s.project_count = 0; }) == ErrorCode::InvalidSpec);
        CHECK(bad([](CorpusSpec& s) { s.vulnerability_rate = 1.5; }) == ErrorCode::InvalidSpec);
        CHECK(bad([](CorpusSpec& s) { s.call_density = -0.1; }) == ErrorCode::InvalidSpec);
        CHECK(bad([](CorpusSpec& s) { s.max_releases = 0; }) == ErrorCode::InvalidSpec);
        CHECK(bad([](CorpusSpec& s) { s.root_count = -1; }) == ErrorCode::InvalidSpec);
        CHECK(!std::filesystem::exists(dir / "x"));

        testing::write_text(dir / "busy/file", "x");
        CHECK(code_of([&] { generate(small_spec(0), dir / "busy"); }) == ErrorCode::Io);
        CHECK(code_of([&] { generate_figure1(dir / "busy"); }) == ErrorCode::Io);
    }

    TEST_CASE("the three-package example")
    {
        testing::TempDir dir;
        const auto g = generate_figure1(dir / "fig");
        CHECK(g.projects == 3);
        CHECK(g.advisories == 1);
        const auto ws = Workspace::load(WorkspacePaths::corpus(dir / "fig"));
        const auto* adv = ws.advisories.find("FIG1-0001");
        REQUIRE(adv != nullptr);
        CHECK(adv->severity == Severity::High);
        CHECK(adv->cwe_ids == std::vector<std::string> { "CWE-502" });
        CHECK(is_dependency_affected(Coordinate::parse("fig1:C:1.0"), ws.advisories).size() == 1);
        CHECK(is_dependency_affected(Coordinate::parse("fig1:C:1.1"), ws.advisories).empty());
        const auto marks = build_vulnerability_marks(ws);
        CHECK(marks.marks.size() == 1);
        CHECK(marks.marks.at("fig1:C:1.0").at("C.Zeta()") == std::set<std::string> { "FIG1-0001" });
        CHECK(read_roots(dir / "fig/roots.txt") == std::vector<Coordinate> { Coordinate::parse("fig1:A:1.0") });
    }
}
