#include "diff_gen.hpp"
#include "oracles/spans.hpp"
#include "support.hpp"

#include <sca/callgraph.hpp>
#include <sca/error.hpp>
#include <sca/patch.hpp>
#include <sca/version.hpp>

#include <doctest.h>

using namespace sca;
using testing::code_of;

namespace {

const char* kGitDiff = R"(diff --git a/src/main/java/Foo.java b/src/main/java/Foo.java
index 3b18e51..a9c2f4d 100644
--- a/src/main/java/Foo.java
+++ b/src/main/java/Foo.java
@@ -10,6 +10,7 @@ public class Foo {
     int a;
     int b;
-    return a;
+    check(a);
+    return b;
     int c;
     int d;
     int e;
@@ -40,3 +41,2 @@
 x
-y
 z
\ No newline at end of file
)";


} // namespace

TEST_SUITE("patch_analysis")
{
    TEST_CASE("git diff line numbers")
    {
        const auto diffs = parse_unified_diff(kGitDiff);
        REQUIRE(diffs.size() == 1);
        CHECK(diffs[0].path == "src/main/java/Foo.java");
        CHECK(diffs[0].modified_lines_pre == std::set<int> { 12, 41 });
        CHECK(diffs[0].modified_lines_post == std::set<int> { 12, 13 });
    }

    TEST_CASE("new and deleted files")
    {
        const auto added = parse_unified_diff("--- /dev/null\n+++ b/New.java\n@@ -0,0 +1,2 @@\n+a\n+b\n");
        REQUIRE(added.size() == 1);
        CHECK(added[0].path == "New.java");
        CHECK(added[0].modified_lines_post == std::set<int> { 1, 2 });
        const auto removed = parse_unified_diff("--- a/Old.java\n+++ /dev/null\n@@ -1 +0,0 @@\n-a\n");
        REQUIRE(removed.size() == 1);
        CHECK(removed[0].path == "Old.java");
        CHECK(removed[0].modified_lines_pre == std::set<int> { 1 });
        CHECK(parse_unified_diff("").empty());
    }

    TEST_CASE("malformed diffs")
    {
        for (const char* bad : {
                 "@@ -1,1 +1,1 @@\n-a\n+b\n",
                 "--- a/x\n+++ b/x\n@@ -1,2 +1,2 @@\n-a\n",
                 "--- a/x\n+++ b/x\n@@ bogus @@\n",
                 "--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n?a\n+b\n",
                 "--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n-a\n-b\n",
                 "--- a/x\n+++ b/x\n@@ -0,1 +1,1 @@\n-a\n+b\n",
             }) {
            INFO(std::string(bad));
            CHECK(code_of([&] { parse_unified_diff(bad); }) == ErrorCode::MalformedDiff);
        }
    }

    TEST_CASE("random diffs parse to the lines they were built from")
    {
        testing::Rng rng(31);
        for (int i = 0; i < 500; ++i) {
            const auto d = testing::random_diff(rng, rng.chance(0.5));
            INFO(d.text);
            REQUIRE(parse_unified_diff(d.text) == d.expected);
        }
    }

    TEST_CASE("render then parse is the identity on line sets")
    {
        testing::Rng rng(32);
        for (int i = 0; i < 300; ++i) {
            const auto d = testing::random_diff(rng);
            std::vector<FileDiff> nonempty;
            for (const auto& f : d.expected)
                if (!f.modified_lines_pre.empty() || !f.modified_lines_post.empty())
                    nonempty.push_back(f);
            const auto text = render_unified_diff(nonempty);
            INFO(text);
            REQUIRE(parse_unified_diff(text) == nonempty);
        }
    }

    TEST_CASE("repeated paths merge")
    {
        const std::vector<FileDiff> parts { { "b", { 1 }, {} }, { "a", {}, { 2 } }, { "b", { 3 }, { 4 } } };
        const auto merged = merge_file_diffs(parts);
        REQUIRE(merged.size() == 2);
        CHECK(merged[0].path == "a");
        CHECK(merged[1].modified_lines_pre == std::set<int> { 1, 3 });
        CHECK(merged[1].modified_lines_post == std::set<int> { 4 });
    }

    TEST_CASE("callable index")
    {
        CallableIndex idx;
        idx.add({ "A.f()", "A.java", 3, 9 });
        idx.add({ "A.g()", "A.java", 10, 10 });
        idx.add({ "B.f()", "B.java", 3, 9 });
        CHECK(code_of([&] { idx.add({ "A.h()", "A.java", 9, 12 }); }) == ErrorCode::OverlappingSpans);
        CHECK(code_of([&] { idx.add({ "A.h()", "A.java", 1, 3 }); }) == ErrorCode::OverlappingSpans);
        CHECK(code_of([&] { idx.add({ "A.h()", "A.java", 20, 19 }); }) == ErrorCode::MalformedGraph);
        CHECK(code_of([&] { idx.add({ "A.h()", "A.java", 0, 1 }); }) == ErrorCode::MalformedGraph);
        CHECK(idx.enclosing("A.java", 2) == nullptr);
        CHECK(idx.enclosing("A.java", 3)->signature == "A.f()");
        CHECK(idx.enclosing("A.java", 9)->signature == "A.f()");
        CHECK(idx.enclosing("A.java", 10)->signature == "A.g()");
        CHECK(idx.enclosing("A.java", 11) == nullptr);
        CHECK(idx.enclosing("C.java", 5) == nullptr);
        CHECK(idx.has_signature("B.f()"));
        CHECK(!idx.has_signature("A.h()"));
    }

    TEST_CASE("location agrees with a full scan")
    {
        testing::Rng rng(33);
        for (int i = 0; i < 500; ++i) {
            const auto d = testing::random_diff(rng);
            const auto fp = testing::index_of(d.first_patched);
            const auto lv = testing::index_of(d.last_vulnerable);
            const auto diffs = parse_unified_diff(d.text);
            REQUIRE(locate_vulnerable_callables(diffs, fp, lv)
                    == oracle::locate_by_scan(diffs, d.first_patched, d.last_vulnerable));
        }
    }

    TEST_CASE("added and removed lines use their own version")
    {
        CallableIndex fp;
        fp.add({ "New.m()", "X.java", 1, 5 });
        CallableIndex lv;
        lv.add({ "Old.m()", "X.java", 10, 12 });
        const std::vector<FileDiff> only_added { { "X.java", {}, { 3 } } };
        CHECK(locate_vulnerable_callables(only_added, fp, lv) == std::set<std::string> { "New.m()" });
        const std::vector<FileDiff> only_removed { { "X.java", { 11 }, {} } };
        CHECK(locate_vulnerable_callables(only_removed, fp, lv) == std::set<std::string> { "Old.m()" });
        const std::vector<FileDiff> outside { { "X.java", { 3 }, { 11 } } };
        CHECK(locate_vulnerable_callables(outside, fp, lv).empty());
    }

    TEST_CASE("propagation keeps signatures present in each version")
    {
        const auto v = [](const char* t) { return parse_version(t); };
        AffectedVersions av { "g:a", { v("1.0"), v("1.1"), v("1.2"), v("2.0") }, { v("1.0"), v("1.1"), v("1.2") } };
        std::map<PackageVersion, CallableIndex> indices;
        indices[v("1.0")].add({ "f()", "F.java", 1, 2 });
        indices[v("1.1")].add({ "f()", "F.java", 1, 2 });
        indices[v("1.1")].add({ "g()", "F.java", 3, 4 });
        const auto p = propagate_to_affected_versions({ "f()", "g()" }, av, indices);
        CHECK(p.by_version.at(v("1.0")) == std::set<std::string> { "f()" });
        CHECK(p.by_version.at(v("1.1")) == std::set<std::string> { "f()", "g()" });
        CHECK(p.by_version.count(v("2.0")) == 0);
        REQUIRE(p.missing_versions.size() == 1);
        CHECK(p.missing_versions[0] == v("1.2"));
    }

    TEST_CASE("index from a call graph")
    {
        PackageCallGraph g;
        g.owner = Coordinate::parse("g:a:1");
        g.nodes.push_back({ 0, "A.f()", "A.java", 1, 4, false });
        g.nodes.push_back({ 1, "A.<clinit>()", "", 0, 0, false });
        const auto idx = CallableIndex::from_graph(g);
        CHECK(idx.has_signature("A.<clinit>()"));
        CHECK(idx.enclosing("A.java", 2)->signature == "A.f()");
    }

    TEST_CASE("patch manifests")
    {
        testing::TempDir dir;
        testing::write_text(dir / "ADV-1/fix.diff", kGitDiff);
        testing::write_text(dir / "ADV-1/manifest.json",
                            R"({"advisory_id":"ADV-1","project_id":"g:a","last_vulnerable":"g:a:1.0",
                                "first_patched":"1.1","diff_files":["fix.diff","fix.diff"]})");
        const auto manifests = load_patch_manifests(dir.path());
        REQUIRE(manifests.size() == 1);
        const auto& m = manifests[0];
        CHECK(m.last_vulnerable == parse_version("1.0"));
        CHECK(m.first_patched == parse_version("1.1"));
        const auto commit = load_patch_commit(m);
        REQUIRE(commit.file_diffs.size() == 1);
        CHECK(commit.file_diffs[0].modified_lines_post == std::set<int> { 12, 13 });

        CHECK(code_of([] {
            PatchManifest::parse(R"({"advisory_id":"X","project_id":"g:a","last_vulnerable":"2.0",
                                     "first_patched":"1.0","diff_files":[]})",
                                 ".");
        }) == ErrorCode::InvalidPatchContext);
        CHECK(code_of([] {
            PatchManifest::parse(R"({"advisory_id":"X","project_id":"g:a","last_vulnerable":"g:b:1.0",
                                     "first_patched":"1.1","diff_files":[]})",
                                 ".");
        }) == ErrorCode::InvalidPatchContext);
        CHECK(code_of([] { PatchManifest::parse("{}", "."); }) == ErrorCode::MalformedDocument);

        testing::write_text(dir / "empty.diff", "");
        auto empty = m;
        empty.diff_files = { dir / "empty.diff" };
        CHECK(code_of([&] { load_patch_commit(empty); }) == ErrorCode::MalformedDiff);
        empty.diff_files = { dir / "absent.diff" };
        CHECK(code_of([&] { load_patch_commit(empty); }) == ErrorCode::Io);
    }
}
