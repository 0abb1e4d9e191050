#pragma once

#include <sca/coordinate.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sca {

class DependencyGraph;

struct CallableNode {
    int id = 0;
    std::string signature;
    std::string file;
    int start_line = 0;
    int end_line = 0;
    bool entrypoint = false;

    friend bool operator==(const CallableNode&, const CallableNode&) = default;
};

/// Call graph of one package version in the exchange format:
/// {coordinate, nodes: [{id, signature, file, start_line, end_line, entrypoint}],
///  internal_edges: [[a, b]], external_calls: [[a, "signature"]]}
struct PackageCallGraph {
    Coordinate owner;
    std::vector<CallableNode> nodes;
    std::vector<std::pair<int, int>> internal_edges;
    std::vector<std::pair<int, std::string>> external_calls;

    /// Throws Error{MalformedGraph}: duplicate ids or signatures, dangling
    /// edge endpoints, or spans with start > end.
    void validate() const;

    static PackageCallGraph parse(std::string_view raw);
    std::string to_json() const;
};

/// Call graphs keyed by coordinate string.
class GraphStore {
public:
    /// Throws Error{DuplicateCoordinate}.
    void add(PackageCallGraph graph);
    const PackageCallGraph* find(const Coordinate& c) const;
    const PackageCallGraph* find(std::string_view coordinate) const;
    const std::map<std::string, PackageCallGraph, std::less<>>& all() const noexcept { return graphs_; }

    static GraphStore load_directory(const std::filesystem::path& dir);

private:
    std::map<std::string, PackageCallGraph, std::less<>> graphs_;
};

using GlobalId = std::uint32_t;

enum class EdgeKind { Internal, External };

struct WholeNode {
    std::size_t owner = 0; // index into WholeProgramGraph::owners()
    int local_id = 0;
    std::string signature;
    std::string file;
    int start_line = 0;
    int end_line = 0;
};

struct WholeEdge {
    GlobalId target = 0;
    EdgeKind kind = EdgeKind::Internal;

    friend bool operator==(const WholeEdge&, const WholeEdge&) = default;
};

/// coordinate string -> signature -> advisory ids
using VulnerabilityMarks = std::map<std::string, std::map<std::string, std::set<std::string>>>;

struct StitchResult;
struct Annotation;

/// Stitched call graph of a root and a dependency set. Global ids follow the
/// sorted coordinate order of the owners and, within an owner, node id order.
class WholeProgramGraph {
public:
    const Coordinate& root() const noexcept { return owners_.at(root_owner_); }
    std::size_t root_owner() const noexcept { return root_owner_; }
    const std::vector<Coordinate>& owners() const noexcept { return owners_; }
    const std::vector<WholeNode>& nodes() const noexcept { return nodes_; }
    /// Outgoing edges of a node, ascending by target id.
    const std::vector<WholeEdge>& edges_from(GlobalId id) const { return adjacency_.at(id); }
    std::size_t edge_count() const;
    const Coordinate& owner_of(GlobalId id) const { return owners_.at(nodes_.at(id).owner); }

    const std::map<GlobalId, std::set<std::string>>& vulnerable() const noexcept { return vulnerable_; }

    std::string to_json() const;

private:
    friend StitchResult stitch(const PackageCallGraph&, std::span<const PackageCallGraph>,
                               const std::map<std::string, int>&);
    friend Annotation annotate_vulnerable(WholeProgramGraph, const VulnerabilityMarks&);
    friend WholeProgramGraph whole_graph_from_json(std::string_view);

    std::vector<Coordinate> owners_;
    std::size_t root_owner_ = 0;
    std::vector<WholeNode> nodes_;
    std::vector<std::vector<WholeEdge>> adjacency_;
    std::map<GlobalId, std::set<std::string>> vulnerable_;
};

struct UnresolvedCall {
    GlobalId caller = 0;
    std::string target_signature;
};

struct StitchResult {
    WholeProgramGraph graph;
    std::vector<UnresolvedCall> unresolved;
};

/// External calls resolve by exact signature against the other packages; when
/// several packages define the signature the one nearest the root wins (by
/// `depth_by_coordinate`, missing entries count as farthest), then the
/// smallest coordinate string. Throws Error{DuplicateCoordinate}.
StitchResult stitch(const PackageCallGraph& root, std::span<const PackageCallGraph> dependencies,
                    const std::map<std::string, int>& depth_by_coordinate);

StitchResult stitch(const PackageCallGraph& root, std::span<const PackageCallGraph> dependencies,
                    const DependencyGraph& resolved);

struct Annotation {
    WholeProgramGraph graph;
    std::size_t unmatched_marks = 0; // (coordinate, signature) pairs without a node
};

Annotation annotate_vulnerable(WholeProgramGraph graph, const VulnerabilityMarks& marks);

/// Inverse of WholeProgramGraph::to_json. Throws Error{MalformedGraph}.
WholeProgramGraph whole_graph_from_json(std::string_view raw);

} // namespace sca
