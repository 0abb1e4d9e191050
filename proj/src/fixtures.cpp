#include <sca/fixtures.hpp>

#include <sca/callgraph.hpp>
#include <sca/dependency.hpp>
#include <sca/error.hpp>
#include <sca/patch.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace sca {

using json = nlohmann::json;

void CorpusSpec::validate() const
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); };
    if (project_count < 1)
        fail("project_count must be positive");
    if (max_releases < 1)
        fail("max_releases must be positive");
    if (max_direct_deps < 1)
        fail("max_direct_deps must be positive");
    if (max_depth_target < 1)
        fail("max_depth_target must be positive");
    if (root_count < 1)
        fail("root_count must be positive");
    if (!(vulnerability_rate >= 0.0 && vulnerability_rate <= 1.0))
        fail("vulnerability_rate must lie in [0, 1]");
    if (!(call_density >= 0.0 && call_density <= 1.0))
        fail("call_density must lie in [0, 1]");
}

namespace {

// Fixed arithmetic on top of mt19937_64 so corpora do not depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : engine_(seed)
    {
    }

    int between(int lo, int hi)
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(engine_() % span);
    }
    bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }

private:
    std::mt19937_64 engine_;
};

void write_file(const std::filesystem::path& p, const std::string& content)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + p.string());
    out << content;
}

void prepare_output(const std::filesystem::path& out)
{
    if (std::filesystem::exists(out)) {
        if (!std::filesystem::is_directory(out) || !std::filesystem::is_empty(out))
            throw Error(ErrorCode::Io, "output directory " + out.string() + " exists and is not empty");
    }
    std::filesystem::create_directories(out);
}

std::string release_name(int r)
{
    return std::to_string(1 + r / 3) + "." + std::to_string(r % 3);
}

std::string graph_file_name(const std::string& coordinate)
{
    std::string name = coordinate;
    std::replace(name.begin(), name.end(), ':', '_');
    return name + ".json";
}

struct Method {
    std::string signature;
    int intro = 0; // first release that has it
    int start = 0;
    int end = 0;
};

struct SynProject {
    std::string group;
    std::string artifact;
    std::string file;
    int layer = 0;
    int releases = 1;
    std::vector<Method> methods;

    std::string id() const { return group + ":" + artifact; }
    std::string coordinate(int r) const { return id() + ":" + release_name(r); }
};

struct Dep {
    int target = 0;
    std::string requirement;
    int pinned = -1; // release index when pinned
    Scope scope = Scope::Compile;
};

json osv_advisory(const std::string& id, const std::string& project_id, const std::string& introduced,
                  const std::string& fixed, const std::string& severity, const std::string& cwe, int year,
                  const std::string& summary)
{
    const auto slash = project_id.find(':');
    const auto repo = "https://git.example.org/" + project_id.substr(0, slash) + "/" + project_id.substr(slash + 1);
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02d-%02d", year, 1 + static_cast<int>(id.size() % 12), 10);
    return json {
        { "id", id },
        { "summary", summary },
        { "published", std::string(date) + "T00:00:00Z" },
        { "modified", std::string(date) + "T00:00:00Z" },
        { "affected",
          json::array({ { { "package", { { "ecosystem", "Maven" }, { "name", project_id } } },
                          { "ranges",
                            json::array({ { { "type", "ECOSYSTEM" },
                                            { "events", json::array({ { { "introduced", introduced } },
                                                                      { { "fixed", fixed } } }) } } }) } } }) },
        { "references",
          json::array({ { { "type", "FIX" }, { "url", repo + "/commit/0123abc" + std::to_string(id.size()) + "def" } },
                        { { "type", "WEB" }, { "url", repo + "/issues/" + std::to_string(year % 100) } } }) },
        { "database_specific", { { "severity", severity }, { "cwe_ids", json::array({ cwe }) } } },
    };
}

void write_patch(const std::filesystem::path& out, const std::string& advisory_id, const std::string& project_id,
                 const std::string& last_vulnerable, const std::string& first_patched, const std::string& file,
                 int start, int end)
{
    const auto dir = out / "patches" / advisory_id;
    const int touched = std::min(start + 2, end);
    FileDiff diff { file, { touched }, { touched } };
    write_file(dir / "fix.diff", render_unified_diff(std::span<const FileDiff>(&diff, 1)));
    json manifest { { "advisory_id", advisory_id },
                    { "project_id", project_id },
                    { "last_vulnerable", last_vulnerable },
                    { "first_patched", first_patched },
                    { "diff_files", json::array({ "fix.diff" }) } };
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace

GeneratedCorpus generate(const CorpusSpec& spec, const std::filesystem::path& out)
{
    spec.validate();
    prepare_output(out);
    Rng rng(spec.seed);
    GeneratedCorpus summary;

    const int layers = spec.max_depth_target + 1;
    std::vector<SynProject> projects(static_cast<std::size_t>(spec.project_count));
    std::vector<std::vector<int>> by_layer(static_cast<std::size_t>(layers));
    for (int i = 0; i < spec.project_count; ++i) {
        auto& p = projects[static_cast<std::size_t>(i)];
        char name[16];
        std::snprintf(name, sizeof name, "p%03d", i);
        p.group = "fx";
        p.artifact = name;
        p.layer = static_cast<int>(static_cast<long long>(i) * layers / spec.project_count);
        p.releases = rng.between(1, spec.max_releases);
        p.file = "src/fx/" + p.artifact + "/Api.java";
        const int method_count = rng.between(3, 6);
        for (int m = 0; m < method_count; ++m) {
            Method method;
            method.signature = "fx." + p.artifact + ".Api.m" + std::to_string(m) + "()";
            method.intro = m < 2 ? 0 : rng.between(0, p.releases - 1);
            method.start = 10 * m + 1;
            method.end = 10 * m + 8;
            p.methods.push_back(method);
        }
        by_layer[static_cast<std::size_t>(p.layer)].push_back(i);
    }

    // Dependencies only point to deeper layers, so every graph is a DAG.
    std::vector<std::vector<std::vector<Dep>>> deps(projects.size());
    for (std::size_t i = 0; i < projects.size(); ++i) {
        const auto& p = projects[i];
        deps[i].resize(static_cast<std::size_t>(p.releases));
        std::vector<int> deeper;
        for (int l = p.layer + 1; l < layers; ++l)
            deeper.insert(deeper.end(), by_layer[static_cast<std::size_t>(l)].begin(),
                          by_layer[static_cast<std::size_t>(l)].end());
        if (deeper.empty())
            continue;
        const auto& next = by_layer[static_cast<std::size_t>(std::min(p.layer + 1, layers - 1))];
        for (int r = 0; r < p.releases; ++r) {
            const int count = rng.between(0, spec.max_direct_deps);
            std::set<int> chosen;
            for (int d = 0; d < count; ++d) {
                const bool near = !next.empty() && rng.chance(0.6);
                const auto& pool = near ? next : deeper;
                const int target = pool[static_cast<std::size_t>(rng.between(0, static_cast<int>(pool.size()) - 1))];
                if (!chosen.insert(target).second)
                    continue;
                const auto& t = projects[static_cast<std::size_t>(target)];
                Dep dep;
                dep.target = target;
                if (t.releases > 1 && rng.chance(0.2)) {
                    const int lo = rng.between(0, t.releases - 2);
                    dep.requirement = "[" + release_name(lo) + "," + release_name(t.releases - 1) + "]";
                } else {
                    dep.pinned = rng.between(0, t.releases - 1);
                    dep.requirement = release_name(dep.pinned);
                }
                if (rng.chance(0.05))
                    dep.scope = Scope::Test;
                deps[i][static_cast<std::size_t>(r)].push_back(dep);
            }
        }
    }

    for (std::size_t i = 0; i < projects.size(); ++i) {
        const auto& p = projects[i];
        json releases = json::array();
        for (int r = 0; r < p.releases; ++r) {
            json jdeps = json::array();
            for (const auto& d : deps[i][static_cast<std::size_t>(r)])
                jdeps.push_back({ { "project", projects[static_cast<std::size_t>(d.target)].id() },
                                  { "requirement", d.requirement },
                                  { "scope", std::string(to_string(d.scope)) },
                                  { "optional", false } });
            releases.push_back({ { "version", release_name(r) }, { "dependencies", jdeps } });
        }
        write_file(out / "registry" / (p.group + "_" + p.artifact + ".json"),
                   json { { "project_id", p.id() }, { "releases", releases } }.dump(2) + "\n");
        summary.releases += static_cast<std::size_t>(p.releases);

        for (int r = 0; r < p.releases; ++r) {
            PackageCallGraph g;
            g.owner = Coordinate::parse(p.coordinate(r));
            std::vector<int> present;
            for (int m = 0; m < static_cast<int>(p.methods.size()); ++m) {
                const auto& method = p.methods[static_cast<std::size_t>(m)];
                if (method.intro > r)
                    continue;
                present.push_back(m);
                g.nodes.push_back(CallableNode { m, method.signature, p.file, method.start, method.end, m == 0 });
            }
            for (std::size_t a = 0; a < present.size(); ++a)
                for (std::size_t b = a + 1; b < present.size(); ++b)
                    if (rng.chance(spec.call_density * 0.5))
                        g.internal_edges.emplace_back(present[a], present[b]);
            for (const auto& d : deps[i][static_cast<std::size_t>(r)]) {
                const auto& t = projects[static_cast<std::size_t>(d.target)];
                const int visible = d.pinned >= 0 ? d.pinned : t.releases - 1;
                std::vector<const Method*> callable;
                for (const auto& tm : t.methods)
                    if (tm.intro <= visible)
                        callable.push_back(&tm);
                for (int caller : present) {
                    if (!rng.chance(spec.call_density))
                        continue;
                    const auto* target
                        = callable[static_cast<std::size_t>(rng.between(0, static_cast<int>(callable.size()) - 1))];
                    g.external_calls.emplace_back(caller, target->signature);
                }
            }
            write_file(out / "graphs" / graph_file_name(p.coordinate(r)), g.to_json());
        }
    }
    summary.projects = projects.size();

    static const char* severities[] = { "CRITICAL", "HIGH", "MODERATE", "LOW" };
    static const char* cwes[] = { "CWE-502", "CWE-79", "CWE-611", "CWE-22", "CWE-400" };
    int serial = 0;
    for (const auto& p : projects) {
        if (p.releases < 2 || !rng.chance(spec.vulnerability_rate))
            continue;
        const int fixed = rng.between(1, p.releases - 1);
        const int introduced = rng.between(0, fixed - 1);
        std::vector<const Method*> candidates;
        for (const auto& m : p.methods)
            if (m.intro <= fixed - 1)
                candidates.push_back(&m);
        const auto* method = candidates[static_cast<std::size_t>(rng.between(0, static_cast<int>(candidates.size()) - 1))];
        const int year = 2015 + rng.between(0, 7);
        char id[32];
        std::snprintf(id, sizeof id, "FX-%04d-%04d", year, ++serial);
        const auto doc = osv_advisory(id, p.id(), introduced == 0 ? "0" : release_name(introduced),
                                      release_name(fixed), severities[rng.between(0, 3)], cwes[rng.between(0, 4)], year,
                                      "Synthetic flaw in " + method->signature);
        write_file(out / "advisories" / (std::string(id) + ".json"), doc.dump(2) + "\n");
        write_patch(out, id, p.id(), release_name(fixed - 1), release_name(fixed), p.file, method->start, method->end);
        ++summary.advisories;
    }
    std::filesystem::create_directories(out / "advisories");
    std::filesystem::create_directories(out / "patches");

    // Roots: shallow layers first, every release.
    std::string roots;
    for (int l = 0; l < layers && static_cast<int>(summary.roots) < spec.root_count; ++l)
        for (int i : by_layer[static_cast<std::size_t>(l)])
            for (int r = 0; r < projects[static_cast<std::size_t>(i)].releases
                 && static_cast<int>(summary.roots) < spec.root_count;
                 ++r) {
                roots += projects[static_cast<std::size_t>(i)].coordinate(r) + "\n";
                ++summary.roots;
            }
    write_file(out / "roots.txt", roots);
    return summary;
}

GeneratedCorpus generate_figure1(const std::filesystem::path& out)
{
    prepare_output(out);

    auto project = [](const std::string& id, const std::vector<std::pair<std::string, std::string>>& releases) {
        json rel = json::array();
        for (const auto& [version, dep] : releases) {
            json deps = json::array();
            if (!dep.empty()) {
                const auto cut = dep.rfind(':');
                deps.push_back({ { "project", dep.substr(0, cut) },
                                 { "requirement", dep.substr(cut + 1) },
                                 { "scope", "compile" },
                                 { "optional", false } });
            }
            rel.push_back({ { "version", version }, { "dependencies", deps } });
        }
        return json { { "project_id", id }, { "releases", rel } }.dump(2) + "\n";
    };
    write_file(out / "registry" / "fig1_A.json", project("fig1:A", { { "1.0", "fig1:B:1.0" } }));
    write_file(out / "registry" / "fig1_B.json", project("fig1:B", { { "1.0", "fig1:C:1.0" } }));
    write_file(out / "registry" / "fig1_C.json", project("fig1:C", { { "1.0", "" }, { "1.1", "" } }));

    PackageCallGraph a;
    a.owner = Coordinate::parse("fig1:A:1.0");
    a.nodes = { { 0, "A.Main()", "src/A.java", 3, 6, true }, { 1, "A.Foo()", "src/A.java", 8, 12, false } };
    a.internal_edges = { { 0, 1 } };
    a.external_calls = { { 1, "B.Bar()" } };
    PackageCallGraph b;
    b.owner = Coordinate::parse("fig1:B:1.0");
    b.nodes = { { 0, "B.Bar()", "src/B.java", 3, 7, true }, { 1, "B.Baz()", "src/B.java", 9, 12, true } };
    b.external_calls = { { 0, "C.Zeta()" } };
    for (const auto& version : { "1.0", "1.1" }) {
        PackageCallGraph c;
        c.owner = Coordinate::parse(std::string("fig1:C:") + version);
        c.nodes = { { 0, "C.Zeta()", "src/C.java", 3, 9, true }, { 1, "C.Eta()", "src/C.java", 11, 14, true } };
        write_file(out / "graphs" / graph_file_name(c.owner.to_string()), c.to_json());
    }
    write_file(out / "graphs" / graph_file_name(a.owner.to_string()), a.to_json());
    write_file(out / "graphs" / graph_file_name(b.owner.to_string()), b.to_json());

    const auto doc = osv_advisory("FIG1-0001", "fig1:C", "0", "1.1", "HIGH", "CWE-502", 2020,
                                  "Zeta deserializes untrusted input");
    write_file(out / "advisories" / "FIG1-0001.json", doc.dump(2) + "\n");
    write_patch(out, "FIG1-0001", "fig1:C", "1.0", "1.1", "src/C.java", 3, 9);
    write_file(out / "roots.txt", "fig1:A:1.0\n");
    return GeneratedCorpus { 3, 4, 1, 1 };
}

} // namespace sca
