#pragma once

#include <sca/coordinate.hpp>
#include <sca/version.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sca {

enum class Scope { Compile, Provided, Test, Runtime };

std::string_view to_string(Scope s);
Scope parse_scope(std::string_view text);

/// A pinned version, or a range that resolves to its highest matching release.
using Requirement = std::variant<PackageVersion, VersionRange>;

struct Declaration {
    std::string project;
    Requirement requirement;
    std::string requirement_text;
    Scope scope = Scope::Compile;
    bool optional = false;
};

struct Release {
    PackageVersion version;
    std::vector<Declaration> dependencies; // declaration order preserved
};

struct Project {
    std::string project_id;
    std::vector<Release> releases;

    const Release* find(const PackageVersion& v) const;
    std::vector<PackageVersion> versions() const;
};

/// Read-only map from project id to its releases and their declarations.
class Registry {
public:
    void add(Project project);
    const Project* find(std::string_view project_id) const;
    const std::map<std::string, Project, std::less<>>& projects() const noexcept { return projects_; }

    /// One JSON document per project:
    /// {project_id, releases: [{version, dependencies: [{project, requirement, scope, optional}]}]}
    static Project parse_project(std::string_view raw);
    static std::string emit_project(const Project& project);
    static Registry load_directory(const std::filesystem::path& dir);

private:
    std::map<std::string, Project, std::less<>> projects_;
};

/// Positive dependency depth or unlimited.
class Depth {
public:
    static Depth max() { return Depth {}; }
    /// Throws std::invalid_argument unless k >= 1.
    static Depth of(int k);
    /// "max" or a positive integer.
    static Depth parse(std::string_view text);

    bool is_max() const noexcept { return !limit_; }
    int value() const { return limit_.value(); }
    bool admits(int depth) const noexcept { return depth >= 1 && (!limit_ || depth <= *limit_); }
    std::string to_string() const;

    friend bool operator==(const Depth&, const Depth&) = default;
    friend bool operator<(const Depth& a, const Depth& b)
    {
        if (a.is_max() || b.is_max())
            return !a.is_max() && b.is_max();
        return *a.limit_ < *b.limit_;
    }

private:
    Depth() = default;
    std::optional<int> limit_;
};

struct ResolveOptions {
    /// Keep Test/Provided scopes and optional declarations everywhere.
    bool include_all_scopes = false;
};

/// Mediated dependency graph of a root coordinate. depth(root) == 0 and every
/// other node's depth is its shortest edge distance from the root.
class DependencyGraph {
public:
    DependencyGraph() = default;

    /// Builds the graph from explicit nodes and edges, computing depths by BFS.
    /// Throws Error{MalformedGraph} when a node is unreachable, an edge names an
    /// unknown node, or a project appears with two versions.
    static DependencyGraph from_edges(const Coordinate& root, const std::vector<Coordinate>& nodes,
                                      const std::vector<std::pair<Coordinate, Coordinate>>& edges);

    const Coordinate& root() const noexcept { return root_; }
    /// Sorted by coordinate string; includes the root.
    std::vector<Coordinate> nodes() const;
    const std::set<std::pair<std::string, std::string>>& edges() const noexcept { return edges_; }
    std::optional<int> depth(const Coordinate& c) const;
    std::optional<int> depth(std::string_view coordinate) const;
    std::size_t size() const noexcept { return nodes_.size(); }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Pre-resolved exchange form: {root, nodes: [...], edges: [[from, to], ...]}.
    std::string to_json() const;
    static DependencyGraph from_json(std::string_view raw);

    friend bool operator==(const DependencyGraph& a, const DependencyGraph& b)
    {
        return a.root_ == b.root_ && a.depths_ == b.depths_ && a.edges_ == b.edges_;
    }

private:
    friend DependencyGraph resolve(const Coordinate&, const Registry&, const ResolveOptions&);

    Coordinate root_;
    std::map<std::string, Coordinate> nodes_;
    std::map<std::string, int> depths_;
    std::set<std::pair<std::string, std::string>> edges_;
    std::map<std::string, std::string> parents_; // BFS discovery parent
    std::vector<std::string> warnings_;
};

/// Breadth-first, nearest-wins mediation with first-declared tie-break.
/// Throws Error{MissingProject} or Error{UnresolvableVersion}.
DependencyGraph resolve(const Coordinate& root, const Registry& registry, const ResolveOptions& options = {});

/// Nodes with 1 <= depth <= k, sorted; the root is never included.
std::vector<Coordinate> depth_limit(const DependencyGraph& g, Depth k);

int max_depth(const DependencyGraph& g);

/// Indented tree of the BFS spanning tree, children in coordinate order.
std::string render_tree(const DependencyGraph& g, Depth k = Depth::max());

} // namespace sca
