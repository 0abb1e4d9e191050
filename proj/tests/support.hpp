#pragma once

#include <sca/callgraph.hpp>
#include <sca/coordinate.hpp>
#include <sca/error.hpp>

#include <doctest.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

namespace testing {

class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter { 0 };
        path_ = std::filesystem::temp_directory_path()
            / ("sca-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

private:
    std::filesystem::path path_;
};

inline std::string read_text(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& content)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
}

// Code of the sca::Error raised by f; fails the test when nothing is thrown.
inline sca::ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const sca::Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return sca::ErrorCode::Io;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : engine_(seed)
    {
    }
    int between(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }
    template <typename T>
    const T& pick(const std::vector<T>& v)
    {
        return v[static_cast<std::size_t>(between(0, static_cast<int>(v.size()) - 1))];
    }

private:
    std::mt19937_64 engine_;
};

// A random whole-program graph built through the real stitcher. Node i carries
// signature "n<i>"; owners are g:p<k>:1 with p0 the root.
struct RandomProgram {
    int nodes = 0;
    std::vector<int> owner_of;
    std::set<std::pair<int, int>> edges;
    std::map<int, std::set<std::string>> vulnerable;
    sca::WholeProgramGraph graph;

    std::vector<int> root_nodes() const
    {
        std::vector<int> out;
        for (int i = 0; i < nodes; ++i)
            if (owner_of[static_cast<std::size_t>(i)] == 0)
                out.push_back(i);
        return out;
    }
    static int index_of(const std::string& signature) { return std::stoi(signature.substr(1)); }
};

inline RandomProgram random_program(Rng& rng, int max_nodes, int max_edges)
{
    RandomProgram p;
    p.nodes = rng.between(1, max_nodes);
    const int packages = rng.between(1, std::min(4, p.nodes));
    for (int i = 0; i < p.nodes; ++i)
        p.owner_of.push_back(i < packages ? i : rng.between(0, packages - 1));
    const int edge_count = rng.between(0, max_edges);
    for (int e = 0; e < edge_count; ++e)
        p.edges.emplace(rng.between(0, p.nodes - 1), rng.between(0, p.nodes - 1));

    std::vector<sca::PackageCallGraph> graphs(static_cast<std::size_t>(packages));
    for (int k = 0; k < packages; ++k)
        graphs[static_cast<std::size_t>(k)].owner = sca::Coordinate::parse("g:p" + std::to_string(k) + ":1");
    for (int i = 0; i < p.nodes; ++i)
        graphs[static_cast<std::size_t>(p.owner_of[static_cast<std::size_t>(i)])].nodes.push_back(
            sca::CallableNode { i, "n" + std::to_string(i), "", 0, 0, false });
    for (const auto& [a, b] : p.edges) {
        auto& g = graphs[static_cast<std::size_t>(p.owner_of[static_cast<std::size_t>(a)])];
        if (p.owner_of[static_cast<std::size_t>(a)] == p.owner_of[static_cast<std::size_t>(b)])
            g.internal_edges.emplace_back(a, b);
        else
            g.external_calls.emplace_back(a, "n" + std::to_string(b));
    }
    sca::VulnerabilityMarks marks;
    for (int i = 0; i < p.nodes; ++i) {
        if (!rng.chance(0.3))
            continue;
        const auto adv = "ADV-" + std::to_string(rng.between(1, 3));
        p.vulnerable[i].insert(adv);
        marks[graphs[static_cast<std::size_t>(p.owner_of[static_cast<std::size_t>(i)])].owner.to_string()]
             ["n" + std::to_string(i)]
                 .insert(adv);
    }
    std::map<std::string, int> depths;
    for (int k = 1; k < packages; ++k)
        depths[graphs[static_cast<std::size_t>(k)].owner.to_string()] = k;
    std::vector<sca::PackageCallGraph> deps(graphs.begin() + 1, graphs.end());
    auto stitched = sca::stitch(graphs[0], deps, depths);
    p.graph = sca::annotate_vulnerable(std::move(stitched.graph), marks).graph;
    return p;
}

} // namespace testing
