#include <sca/dependency.hpp>

#include <sca/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace sca {

using nlohmann::json;

Coordinate Coordinate::parse(std::string_view text)
{
    const auto first = text.find(':');
    const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
    if (first == std::string_view::npos || second == std::string_view::npos
        || text.find(':', second + 1) != std::string_view::npos)
        throw Error(ErrorCode::MalformedCoordinate, "expected group:artifact:version, got '" + std::string(text) + "'");
    Coordinate c;
    c.group = std::string(text.substr(0, first));
    c.artifact = std::string(text.substr(first + 1, second - first - 1));
    const auto version = text.substr(second + 1);
    if (c.group.empty() || c.artifact.empty() || version.empty())
        throw Error(ErrorCode::MalformedCoordinate, "empty part in '" + std::string(text) + "'");
    try {
        c.version = PackageVersion::parse(version);
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedCoordinate, "'" + std::string(text) + "': " + e.what());
    }
    return c;
}

std::string_view to_string(Scope s)
{
    switch (s) {
    case Scope::Compile:
        return "compile";
    case Scope::Provided:
        return "provided";
    case Scope::Test:
        return "test";
    case Scope::Runtime:
        return "runtime";
    }
    return "compile";
}

Scope parse_scope(std::string_view text)
{
    if (text.empty() || text == "compile")
        return Scope::Compile;
    if (text == "provided")
        return Scope::Provided;
    if (text == "test")
        return Scope::Test;
    if (text == "runtime")
        return Scope::Runtime;
    throw Error(ErrorCode::MalformedDocument, "unknown scope '" + std::string(text) + "'");
}

const Release* Project::find(const PackageVersion& v) const
{
    // Prefer an exact textual match, then an order-equal one ("1.0" vs "1.0.0").
    for (const auto& r : releases) {
        if (r.version.original() == v.original())
            return &r;
    }
    for (const auto& r : releases) {
        if (r.version == v)
            return &r;
    }
    return nullptr;
}

std::vector<PackageVersion> Project::versions() const
{
    std::vector<PackageVersion> out;
    out.reserve(releases.size());
    for (const auto& r : releases)
        out.push_back(r.version);
    return out;
}

void Registry::add(Project project)
{
    auto id = project.project_id;
    projects_.insert_or_assign(std::move(id), std::move(project));
}

const Project* Registry::find(std::string_view project_id) const
{
    auto it = projects_.find(project_id);
    return it == projects_.end() ? nullptr : &it->second;
}

Project Registry::parse_project(std::string_view raw)
{
    const json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorCode::MalformedDocument, "registry document is not a JSON object");
    try {
        Project p;
        p.project_id = doc.at("project_id").get<std::string>();
        if (p.project_id.empty())
            throw Error(ErrorCode::MalformedDocument, "empty project_id");
        for (const auto& rel : doc.value("releases", json::array())) {
            Release r;
            r.version = PackageVersion::parse(rel.at("version").get<std::string>());
            for (const auto& dep : rel.value("dependencies", json::array())) {
                Declaration d;
                d.project = dep.at("project").get<std::string>();
                d.requirement_text = dep.at("requirement").get<std::string>();
                const bool is_range = !d.requirement_text.empty()
                    && (d.requirement_text.front() == '[' || d.requirement_text.front() == '(');
                if (is_range)
                    d.requirement = parse_range(d.requirement_text, RangeSyntax::MavenBracket);
                else
                    d.requirement = PackageVersion::parse(d.requirement_text);
                d.scope = parse_scope(dep.value("scope", std::string("compile")));
                d.optional = dep.value("optional", false);
                r.dependencies.push_back(std::move(d));
            }
            p.releases.push_back(std::move(r));
        }
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedDocument)
            throw;
        throw Error(ErrorCode::MalformedDocument, e.what());
    }
}

std::string Registry::emit_project(const Project& project)
{
    json releases = json::array();
    for (const auto& r : project.releases) {
        json deps = json::array();
        for (const auto& d : r.dependencies) {
            deps.push_back({ { "project", d.project },
                             { "requirement", d.requirement_text },
                             { "scope", std::string(to_string(d.scope)) },
                             { "optional", d.optional } });
        }
        releases.push_back({ { "version", r.version.original() }, { "dependencies", std::move(deps) } });
    }
    json doc { { "project_id", project.project_id }, { "releases", std::move(releases) } };
    return doc.dump(2) + "\n";
}

Registry Registry::load_directory(const std::filesystem::path& dir)
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
    Registry registry;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            registry.add(parse_project(buf.str()));
        } catch (const Error& e) {
            throw Error(e.code(), file.filename().string() + ": " + e.what());
        }
    }
    return registry;
}

Depth Depth::of(int k)
{
    if (k < 1)
        throw std::invalid_argument("depth must be a positive integer");
    Depth d;
    d.limit_ = k;
    return d;
}

Depth Depth::parse(std::string_view text)
{
    if (text == "max" || text == "MAX")
        return max();
    int k = 0;
    for (char c : text) {
        if (c < '0' || c > '9')
            throw std::invalid_argument("depth must be 'max' or a positive integer: '" + std::string(text) + "'");
        k = k * 10 + (c - '0');
        if (k > 1'000'000)
            throw std::invalid_argument("depth out of range");
    }
    return of(k);
}

std::string Depth::to_string() const
{
    return limit_ ? std::to_string(*limit_) : "max";
}

// ---------------------------------------------------------------------------

std::vector<Coordinate> DependencyGraph::nodes() const
{
    std::vector<Coordinate> out;
    out.reserve(nodes_.size());
    for (const auto& [_, c] : nodes_)
        out.push_back(c);
    return out;
}

std::optional<int> DependencyGraph::depth(const Coordinate& c) const
{
    return depth(c.to_string());
}

std::optional<int> DependencyGraph::depth(std::string_view coordinate) const
{
    auto it = depths_.find(std::string(coordinate));
    if (it == depths_.end())
        return std::nullopt;
    return it->second;
}

DependencyGraph DependencyGraph::from_edges(const Coordinate& root, const std::vector<Coordinate>& nodes,
                                            const std::vector<std::pair<Coordinate, Coordinate>>& edges)
{
    DependencyGraph g;
    g.root_ = root;
    std::map<std::string, std::string> version_of_project;
    auto add_node = [&](const Coordinate& c) {
        const auto key = c.to_string();
        if (g.nodes_.count(key))
            return;
        auto [it, inserted] = version_of_project.emplace(c.project_id(), key);
        if (!inserted)
            throw Error(ErrorCode::MalformedGraph, "project " + c.project_id() + " appears as " + it->second
                                                       + " and " + key);
        g.nodes_.emplace(key, c);
    };
    add_node(root);
    for (const auto& c : nodes)
        add_node(c);

    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& [from, to] : edges) {
        const auto f = from.to_string();
        const auto t = to.to_string();
        if (!g.nodes_.count(f) || !g.nodes_.count(t))
            throw Error(ErrorCode::MalformedGraph, "edge " + f + " -> " + t + " names an unknown node");
        if (g.edges_.emplace(f, t).second)
            adjacency[f].push_back(t);
    }
    for (auto& [_, targets] : adjacency)
        std::sort(targets.begin(), targets.end());

    std::deque<std::string> queue { root.to_string() };
    g.depths_[root.to_string()] = 0;
    while (!queue.empty()) {
        const auto current = queue.front();
        queue.pop_front();
        for (const auto& next : adjacency[current]) {
            if (g.depths_.count(next))
                continue;
            g.depths_[next] = g.depths_[current] + 1;
            g.parents_[next] = current;
            queue.push_back(next);
        }
    }
    for (const auto& [key, _] : g.nodes_) {
        if (!g.depths_.count(key))
            throw Error(ErrorCode::MalformedGraph, key + " is not reachable from " + root.to_string());
    }
    return g;
}

std::string DependencyGraph::to_json() const
{
    json nodes = json::array();
    for (const auto& [key, _] : nodes_)
        nodes.push_back(key);
    json edges = json::array();
    for (const auto& [from, to] : edges_)
        edges.push_back(json::array({ from, to }));
    json doc { { "root", root_.to_string() }, { "nodes", std::move(nodes) }, { "edges", std::move(edges) } };
    return doc.dump(2) + "\n";
}

DependencyGraph DependencyGraph::from_json(std::string_view raw)
{
    const json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorCode::MalformedDocument, "resolved graph is not a JSON object");
    try {
        const auto root = Coordinate::parse(doc.at("root").get<std::string>());
        std::vector<Coordinate> nodes;
        for (const auto& n : doc.value("nodes", json::array()))
            nodes.push_back(Coordinate::parse(n.get<std::string>()));
        std::vector<std::pair<Coordinate, Coordinate>> edges;
        for (const auto& e : doc.value("edges", json::array())) {
            if (!e.is_array() || e.size() != 2)
                throw Error(ErrorCode::MalformedDocument, "edge must be a [from, to] pair");
            edges.emplace_back(Coordinate::parse(e[0].get<std::string>()), Coordinate::parse(e[1].get<std::string>()));
        }
        return from_edges(root, nodes, edges);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    }
}

namespace {

PackageVersion select_version(const Declaration& d, const Project& project)
{
    if (const auto* pinned = std::get_if<PackageVersion>(&d.requirement)) {
        if (const auto* r = project.find(*pinned))
            return r->version;
        throw Error(ErrorCode::UnresolvableVersion, d.project + ":" + pinned->original() + " is not a known release");
    }
    const auto& range = std::get<VersionRange>(d.requirement);
    const Release* best = nullptr;
    for (const auto& r : project.releases) {
        if (range.contains(r.version) && (best == nullptr || r.version > best->version))
            best = &r;
    }
    if (best == nullptr)
        throw Error(ErrorCode::UnresolvableVersion, "no release of " + d.project + " satisfies " + d.requirement_text);
    return best->version;
}

} // namespace

DependencyGraph resolve(const Coordinate& root, const Registry& registry, const ResolveOptions& options)
{
    const auto* root_project = registry.find(root.project_id());
    if (root_project == nullptr)
        throw Error(ErrorCode::MissingProject, "root project " + root.project_id() + " is not in the registry");
    if (root_project->find(root.version) == nullptr)
        throw Error(ErrorCode::UnresolvableVersion, root.to_string() + " is not a known release");

    DependencyGraph g;
    g.root_ = root;
    const auto root_key = root.to_string();
    g.nodes_.emplace(root_key, root);
    g.depths_[root_key] = 0;

    // project id -> selected coordinate key. The first selection of a project
    // is final: BFS order visits shallower declarations first and, within a
    // level, earlier declarations first.
    std::map<std::string, std::string> selected { { root.project_id(), root_key } };
    std::deque<std::string> queue { root_key };

    auto is_ancestor = [&g](const std::string& candidate, std::string node) {
        while (true) {
            if (node == candidate)
                return true;
            auto it = g.parents_.find(node);
            if (it == g.parents_.end())
                return false;
            node = it->second;
        }
    };

    while (!queue.empty()) {
        const auto current_key = queue.front();
        queue.pop_front();
        const auto& current = g.nodes_.at(current_key);
        const int depth = g.depths_.at(current_key);
        const bool is_root = depth == 0;

        const auto* project = registry.find(current.project_id());
        const auto* release = project ? project->find(current.version) : nullptr;
        if (release == nullptr)
            continue;

        for (const auto& decl : release->dependencies) {
            if (!options.include_all_scopes) {
                if (decl.scope == Scope::Test || decl.scope == Scope::Provided)
                    continue;
                if (decl.optional && !is_root)
                    continue;
            }
            if (auto it = selected.find(decl.project); it != selected.end()) {
                if (is_ancestor(it->second, current_key)) {
                    g.warnings_.push_back("cycle: " + current_key + " -> " + decl.project + " ignored");
                    continue;
                }
                if (it->second != current_key)
                    g.edges_.emplace(current_key, it->second);
                continue;
            }
            const auto* dep_project = registry.find(decl.project);
            if (dep_project == nullptr)
                throw Error(ErrorCode::MissingProject, decl.project + " (declared by " + current_key + ") is not in the registry");
            const auto group_end = decl.project.find(':');
            if (group_end == std::string::npos)
                throw Error(ErrorCode::MalformedCoordinate, "project id without group: " + decl.project);

            Coordinate next;
            next.group = decl.project.substr(0, group_end);
            next.artifact = decl.project.substr(group_end + 1);
            next.version = select_version(decl, *dep_project);
            const auto next_key = next.to_string();

            selected.emplace(decl.project, next_key);
            g.nodes_.emplace(next_key, next);
            g.depths_[next_key] = depth + 1;
            g.parents_[next_key] = current_key;
            g.edges_.emplace(current_key, next_key);
            queue.push_back(next_key);
        }
    }
    return g;
}

std::vector<Coordinate> depth_limit(const DependencyGraph& g, Depth k)
{
    std::vector<Coordinate> out;
    for (const auto& c : g.nodes()) {
        if (k.admits(g.depth(c).value_or(0)))
            out.push_back(c);
    }
    return out;
}

int max_depth(const DependencyGraph& g)
{
    int best = 0;
    for (const auto& c : g.nodes())
        best = std::max(best, g.depth(c).value_or(0));
    return best;
}

std::string render_tree(const DependencyGraph& g, Depth k)
{
    // Children in the spanning tree: a node hangs under its BFS parent.
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& c : g.nodes()) {
        const auto key = c.to_string();
        const int d = g.depth(key).value_or(0);
        if (d == 0 || !k.admits(d))
            continue;
        // Recover the parent: the smallest-keyed predecessor one level up.
        std::string parent;
        for (const auto& [from, to] : g.edges()) {
            if (to == key && g.depth(from).value_or(-1) == d - 1) {
                parent = from;
                break;
            }
        }
        children[parent].push_back(key);
    }
    std::ostringstream out;
    auto walk = [&](auto&& self, const std::string& key, int level) -> void {
        out << std::string(static_cast<std::size_t>(level) * 2, ' ') << key << '\n';
        for (const auto& child : children[key])
            self(self, child, level + 1);
    };
    walk(walk, g.root().to_string(), 0);
    return out.str();
}

} // namespace sca
