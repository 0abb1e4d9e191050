#include "process.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

namespace {

testing::CommandResult cli(const std::string& args)
{
    return testing::run_command(std::string(SCA_CLI) + " " + args + " 2>/dev/null");
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("analyze exit codes follow the verdict")
    {
        testing::TempDir dir;
        const auto fig = (dir / "fig").string();
        REQUIRE(cli("fixtures generate --preset figure1 --out " + fig).exit_code == 0);

        const auto base = "analyze --corpus " + fig + " --root fig1:A:1.0 ";
        CHECK(cli(base + "--level method --depth 1").exit_code == 0);
        const auto deep = cli(base + "--level method --depth 2 --format table");
        CHECK(deep.exit_code == 1);
        CHECK(deep.output.find("A.Foo() -> B.Bar() -> C.Zeta()") != std::string::npos);
        const auto json = cli(base + "--level package --depth max --format json");
        CHECK(json.exit_code == 1);
        const auto doc = nlohmann::json::parse(json.output);
        CHECK(doc["vulnerable"] == true);
        CHECK(doc["setting"]["granularity"] == "package");

        CHECK(cli(base + "--level method --depth 0").exit_code == 2);
        CHECK(cli("analyze --corpus " + fig + " --root fig1:Z:1.0").exit_code == 2);
        CHECK(cli("analyze --corpus " + fig + " --root not-a-coordinate").exit_code == 2);
        CHECK(cli("no-such-command").exit_code != 0);
    }

    TEST_CASE("resolve and knowledge base commands")
    {
        testing::TempDir dir;
        const auto fig = (dir / "fig").string();
        REQUIRE(cli("fixtures generate --preset figure1 --out " + fig).exit_code == 0);
        const auto tree = cli("resolve --root fig1:A:1.0 --registry " + fig + "/registry --format tree");
        CHECK(tree.exit_code == 0);
        CHECK(tree.output.find("fig1:C:1.0") != std::string::npos);
        const auto limited = cli("resolve --root fig1:A:1.0 --registry " + fig + "/registry --depth 1 --format json");
        CHECK(limited.output.find("fig1:C:1.0") == std::string::npos);

        const auto stats = cli("kb stats --dir " + fig + "/advisories --by cwe --format tsv");
        CHECK(stats.exit_code == 0);
        CHECK(stats.output.find("CWE-502") != std::string::npos);
        CHECK(cli("kb load --dir " + fig + "/missing").exit_code == 2);
    }

    TEST_CASE("stored runs feed the reports")
    {
        testing::TempDir dir;
        const auto c = (dir / "c").string();
        REQUIRE(cli("fixtures generate --seed 5 --projects 30 --roots 20 --out " + c).exit_code == 0);
        const auto store = (dir / "store").string();
        const auto common = " --corpus " + c + " --roots " + c + "/roots.txt --store " + store
            + " --created-at 2024-03-01T00:00:00Z --depth max";
        REQUIRE(cli("run --level package --id pkg" + common).exit_code == 0);
        REQUIRE(cli("run --level method --id m --workers 3" + common).exit_code == 0);
        const auto top = cli("report top-impact --runs " + store + "/pkg " + store + "/m --top 5 --format tsv");
        CHECK(top.exit_code == 0);
        CHECK(top.output.find("CVE ID\tProject\tPotentially Affected\tActually affected") != std::string::npos);
        CHECK(cli("report top-impact --runs " + store + "/m " + store + "/pkg").exit_code == 2);

        REQUIRE(cli("sweep --level method --id sw --depths 1,2,max --corpus " + c + " --roots " + c
                    + "/roots.txt --store " + store + " --created-at 2024-03-01T00:00:00Z")
                    .exit_code
                == 0);
        const auto curve = cli("report coverage-curve --run " + store + "/sw --format tsv");
        CHECK(curve.exit_code == 0);
        CHECK(curve.output.find("k\tvulnerable_roots\tratio_to_max") == 0);
        const auto index = nlohmann::json::parse(testing::read_text(dir / "store/index.json"));
        CHECK(index["runs"].size() == 3);

        const auto dist = cli("report version-dist --advisories " + c + "/advisories --registry " + c
                              + "/registry --format tsv");
        CHECK(dist.exit_code == 0);
        CHECK(dist.output.find("project\ttotal\tvulnerable\tpercent") == 0);
    }
}
