#include <sca/callgraph.hpp>

#include <sca/dependency.hpp>
#include <sca/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <climits>
#include <fstream>
#include <sstream>
#include <tuple>

namespace sca {

using nlohmann::json;

void PackageCallGraph::validate() const
{
    const auto who = owner.to_string();
    std::set<int> ids;
    std::set<std::string> signatures;
    for (const auto& n : nodes) {
        if (!ids.insert(n.id).second)
            throw Error(ErrorCode::MalformedGraph, who + ": duplicate node id " + std::to_string(n.id));
        if (n.signature.empty())
            throw Error(ErrorCode::MalformedGraph, who + ": node " + std::to_string(n.id) + " has no signature");
        if (!signatures.insert(n.signature).second)
            throw Error(ErrorCode::MalformedGraph, who + ": duplicate signature " + n.signature);
        if (n.start_line > n.end_line)
            throw Error(ErrorCode::MalformedGraph, who + ": span start after end for " + n.signature);
    }
    for (const auto& [a, b] : internal_edges) {
        if (!ids.count(a) || !ids.count(b))
            throw Error(ErrorCode::MalformedGraph, who + ": internal edge " + std::to_string(a) + " -> "
                                                       + std::to_string(b) + " has a dangling endpoint");
    }
    for (const auto& [a, sig] : external_calls) {
        if (!ids.count(a))
            throw Error(ErrorCode::MalformedGraph, who + ": external call from unknown node " + std::to_string(a));
        if (sig.empty())
            throw Error(ErrorCode::MalformedGraph, who + ": external call with empty target");
    }
}

PackageCallGraph PackageCallGraph::parse(std::string_view raw)
{
    const json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorCode::MalformedGraph, "call graph is not a JSON object");
    PackageCallGraph g;
    try {
        g.owner = Coordinate::parse(doc.at("coordinate").get<std::string>());
        for (const auto& n : doc.value("nodes", json::array())) {
            CallableNode node;
            node.id = n.at("id").get<int>();
            node.signature = n.at("signature").get<std::string>();
            node.file = n.value("file", std::string());
            node.start_line = n.value("start_line", 0);
            node.end_line = n.value("end_line", 0);
            node.entrypoint = n.value("entrypoint", false);
            g.nodes.push_back(std::move(node));
        }
        for (const auto& e : doc.value("internal_edges", json::array()))
            g.internal_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        for (const auto& e : doc.value("external_calls", json::array()))
            g.external_calls.emplace_back(e.at(0).get<int>(), e.at(1).get<std::string>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedGraph, e.what());
    }
    g.validate();
    return g;
}

std::string PackageCallGraph::to_json() const
{
    json ns = json::array();
    for (const auto& n : nodes) {
        ns.push_back({ { "id", n.id },
                       { "signature", n.signature },
                       { "file", n.file },
                       { "start_line", n.start_line },
                       { "end_line", n.end_line },
                       { "entrypoint", n.entrypoint } });
    }
    json internal = json::array();
    for (const auto& [a, b] : internal_edges)
        internal.push_back(json::array({ a, b }));
    json external = json::array();
    for (const auto& [a, sig] : external_calls)
        external.push_back(json::array({ a, sig }));
    json doc { { "coordinate", owner.to_string() },
               { "nodes", std::move(ns) },
               { "internal_edges", std::move(internal) },
               { "external_calls", std::move(external) } };
    return doc.dump(2) + "\n";
}

void GraphStore::add(PackageCallGraph graph)
{
    auto key = graph.owner.to_string();
    if (graphs_.count(key))
        throw Error(ErrorCode::DuplicateCoordinate, "two call graphs for " + key);
    graphs_.emplace(std::move(key), std::move(graph));
}

const PackageCallGraph* GraphStore::find(const Coordinate& c) const
{
    return find(c.to_string());
}

const PackageCallGraph* GraphStore::find(std::string_view coordinate) const
{
    auto it = graphs_.find(coordinate);
    return it == graphs_.end() ? nullptr : &it->second;
}

GraphStore GraphStore::load_directory(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::Io, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    GraphStore store;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            store.add(PackageCallGraph::parse(buf.str()));
        } catch (const Error& e) {
            throw Error(e.code(), file.filename().string() + ": " + e.what());
        }
    }
    return store;
}

// ---------------------------------------------------------------------------

std::size_t WholeProgramGraph::edge_count() const
{
    std::size_t n = 0;
    for (const auto& out : adjacency_)
        n += out.size();
    return n;
}

std::string WholeProgramGraph::to_json() const
{
    json owners = json::array();
    for (const auto& o : owners_)
        owners.push_back(o.to_string());
    json ns = json::array();
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const auto& n = nodes_[id];
        ns.push_back({ { "id", id },
                       { "owner", owners_[n.owner].to_string() },
                       { "local_id", n.local_id },
                       { "signature", n.signature },
                       { "file", n.file },
                       { "start_line", n.start_line },
                       { "end_line", n.end_line } });
    }
    json edges = json::array();
    for (std::size_t from = 0; from < adjacency_.size(); ++from) {
        for (const auto& e : adjacency_[from])
            edges.push_back(json::array({ from, e.target, e.kind == EdgeKind::Internal ? "internal" : "external" }));
    }
    json vulnerable = json::object();
    for (const auto& [id, advisories] : vulnerable_)
        vulnerable[std::to_string(id)] = advisories;
    json doc { { "root", owners_.empty() ? std::string() : root().to_string() },
               { "owners", std::move(owners) },
               { "nodes", std::move(ns) },
               { "edges", std::move(edges) },
               { "vulnerable", std::move(vulnerable) } };
    return doc.dump(2) + "\n";
}

WholeProgramGraph whole_graph_from_json(std::string_view raw)
{
    const json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorCode::MalformedGraph, "whole-program graph is not a JSON object");
    WholeProgramGraph g;
    try {
        std::map<std::string, std::size_t> owner_index;
        for (const auto& o : doc.at("owners")) {
            owner_index.emplace(o.get<std::string>(), g.owners_.size());
            g.owners_.push_back(Coordinate::parse(o.get<std::string>()));
        }
        const auto root = doc.at("root").get<std::string>();
        if (!owner_index.count(root))
            throw Error(ErrorCode::MalformedGraph, "root " + root + " is not an owner");
        g.root_owner_ = owner_index.at(root);
        for (const auto& n : doc.at("nodes")) {
            if (n.at("id").get<std::size_t>() != g.nodes_.size())
                throw Error(ErrorCode::MalformedGraph, "node ids must be dense and ordered");
            WholeNode node;
            node.owner = owner_index.at(n.at("owner").get<std::string>());
            node.local_id = n.at("local_id").get<int>();
            node.signature = n.at("signature").get<std::string>();
            node.file = n.value("file", std::string());
            node.start_line = n.value("start_line", 0);
            node.end_line = n.value("end_line", 0);
            g.nodes_.push_back(std::move(node));
        }
        g.adjacency_.resize(g.nodes_.size());
        for (const auto& e : doc.at("edges")) {
            const auto from = e.at(0).get<std::size_t>();
            const auto to = e.at(1).get<GlobalId>();
            if (from >= g.nodes_.size() || to >= g.nodes_.size())
                throw Error(ErrorCode::MalformedGraph, "edge endpoint out of range");
            const auto kind = g.nodes_[from].owner == g.nodes_[to].owner ? EdgeKind::Internal : EdgeKind::External;
            g.adjacency_[from].push_back(WholeEdge { to, kind });
        }
        for (auto& out : g.adjacency_) {
            std::sort(out.begin(), out.end(), [](const WholeEdge& a, const WholeEdge& b) { return a.target < b.target; });
            out.erase(std::unique(out.begin(), out.end()), out.end());
        }
        for (const auto& [key, advisories] : doc.at("vulnerable").items()) {
            const auto id = static_cast<GlobalId>(std::stoul(key));
            if (id >= g.nodes_.size())
                throw Error(ErrorCode::MalformedGraph, "vulnerable id out of range");
            g.vulnerable_[id] = advisories.get<std::set<std::string>>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedGraph, e.what());
    } catch (const std::out_of_range& e) {
        throw Error(ErrorCode::MalformedGraph, e.what());
    }
    return g;
}

StitchResult stitch(const PackageCallGraph& root, std::span<const PackageCallGraph> dependencies,
                    const std::map<std::string, int>& depth_by_coordinate)
{
    std::vector<const PackageCallGraph*> packages { &root };
    std::set<std::string> seen { root.owner.to_string() };
    for (const auto& dep : dependencies) {
        if (!seen.insert(dep.owner.to_string()).second)
            throw Error(ErrorCode::DuplicateCoordinate, "call graph for " + dep.owner.to_string() + " given twice");
        packages.push_back(&dep);
    }
    std::sort(packages.begin(), packages.end(), [](const PackageCallGraph* a, const PackageCallGraph* b) {
        return a->owner.to_string() < b->owner.to_string();
    });

    StitchResult result;
    auto& g = result.graph;
    // local id -> global id, per owner
    std::vector<std::map<int, GlobalId>> local_to_global(packages.size());
    // signature -> candidate (depth, coordinate, global id) per defining package
    std::map<std::string, std::vector<std::tuple<int, std::string, std::size_t, GlobalId>>, std::less<>> definitions;

    for (std::size_t owner = 0; owner < packages.size(); ++owner) {
        const auto& pkg = *packages[owner];
        const auto key = pkg.owner.to_string();
        g.owners_.push_back(pkg.owner);
        if (pkg.owner == root.owner)
            g.root_owner_ = owner;
        const int depth = pkg.owner == root.owner ? 0 : [&] {
            auto it = depth_by_coordinate.find(key);
            return it == depth_by_coordinate.end() ? INT_MAX : it->second;
        }();

        std::vector<const CallableNode*> ordered;
        for (const auto& n : pkg.nodes)
            ordered.push_back(&n);
        std::sort(ordered.begin(), ordered.end(), [](const CallableNode* a, const CallableNode* b) { return a->id < b->id; });
        for (const auto* n : ordered) {
            const auto id = static_cast<GlobalId>(g.nodes_.size());
            local_to_global[owner][n->id] = id;
            g.nodes_.push_back(WholeNode { owner, n->id, n->signature, n->file, n->start_line, n->end_line });
            definitions[n->signature].emplace_back(depth, key, owner, id);
        }
    }
    g.adjacency_.resize(g.nodes_.size());

    for (std::size_t owner = 0; owner < packages.size(); ++owner) {
        const auto& pkg = *packages[owner];
        const auto& ids = local_to_global[owner];
        for (const auto& [a, b] : pkg.internal_edges)
            g.adjacency_[ids.at(a)].push_back(WholeEdge { ids.at(b), EdgeKind::Internal });
        for (const auto& [a, sig] : pkg.external_calls) {
            const GlobalId caller = ids.at(a);
            const std::tuple<int, std::string, std::size_t, GlobalId>* best = nullptr;
            if (auto it = definitions.find(sig); it != definitions.end()) {
                for (const auto& candidate : it->second) {
                    if (std::get<2>(candidate) == owner)
                        continue;
                    if (best == nullptr
                        || std::tie(std::get<0>(candidate), std::get<1>(candidate))
                            < std::tie(std::get<0>(*best), std::get<1>(*best)))
                        best = &candidate;
                }
            }
            if (best == nullptr) {
                result.unresolved.push_back(UnresolvedCall { caller, sig });
                continue;
            }
            g.adjacency_[caller].push_back(WholeEdge { std::get<3>(*best), EdgeKind::External });
        }
    }
    for (auto& out : g.adjacency_) {
        std::sort(out.begin(), out.end(), [](const WholeEdge& x, const WholeEdge& y) { return x.target < y.target; });
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    std::sort(result.unresolved.begin(), result.unresolved.end(), [](const UnresolvedCall& x, const UnresolvedCall& y) {
        return std::tie(x.caller, x.target_signature) < std::tie(y.caller, y.target_signature);
    });
    return result;
}

StitchResult stitch(const PackageCallGraph& root, std::span<const PackageCallGraph> dependencies,
                    const DependencyGraph& resolved)
{
    std::map<std::string, int> depths;
    for (const auto& c : resolved.nodes())
        depths[c.to_string()] = resolved.depth(c).value_or(INT_MAX);
    return stitch(root, dependencies, depths);
}

Annotation annotate_vulnerable(WholeProgramGraph graph, const VulnerabilityMarks& marks)
{
    Annotation result;
    std::map<std::string, std::size_t> owner_index;
    for (std::size_t i = 0; i < graph.owners_.size(); ++i)
        owner_index.emplace(graph.owners_[i].to_string(), i);
    std::map<std::pair<std::size_t, std::string>, GlobalId> by_signature;
    for (std::size_t id = 0; id < graph.nodes_.size(); ++id)
        by_signature.emplace(std::make_pair(graph.nodes_[id].owner, graph.nodes_[id].signature), static_cast<GlobalId>(id));

    for (const auto& [coordinate, signatures] : marks) {
        auto owner = owner_index.find(coordinate);
        for (const auto& [signature, advisories] : signatures) {
            if (owner == owner_index.end()) {
                ++result.unmatched_marks;
                continue;
            }
            auto node = by_signature.find({ owner->second, signature });
            if (node == by_signature.end()) {
                ++result.unmatched_marks;
                continue;
            }
            if (!advisories.empty())
                graph.vulnerable_[node->second].insert(advisories.begin(), advisories.end());
        }
    }
    result.graph = std::move(graph);
    return result;
}

} // namespace sca
