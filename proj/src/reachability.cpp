#include <sca/reachability.hpp>

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>
#include <tuple>

namespace sca {

std::string_view to_string(Granularity g)
{
    return g == Granularity::PackageLevel ? "package" : "method";
}

Granularity parse_granularity(std::string_view text)
{
    if (text == "package")
        return Granularity::PackageLevel;
    if (text == "method")
        return Granularity::MethodLevel;
    throw std::invalid_argument("granularity must be 'package' or 'method': '" + std::string(text) + "'");
}

std::string AnalysisSetting::label() const
{
    return std::string(granularity == Granularity::PackageLevel ? "D_p(" : "D_m(") + depth.to_string() + ")";
}

std::vector<std::string> RootVerdict::advisory_ids() const
{
    std::set<std::string> ids;
    for (const auto& f : findings)
        ids.insert(f.advisory_id);
    return { ids.begin(), ids.end() };
}

RootVerdict analyze_package_level(const DependencyGraph& g, const AdvisoryCollection& kb, Depth k)
{
    RootVerdict verdict;
    verdict.root = g.root();
    verdict.setting = AnalysisSetting { Granularity::PackageLevel, k };
    for (const auto& dep : depth_limit(g, k)) {
        for (auto& id : is_dependency_affected(dep, kb))
            verdict.findings.push_back(Finding { std::move(id), dep, std::nullopt });
    }
    std::sort(verdict.findings.begin(), verdict.findings.end(), [](const Finding& a, const Finding& b) {
        return std::make_tuple(a.advisory_id, a.coordinate.to_string()) < std::make_tuple(b.advisory_id, b.coordinate.to_string());
    });
    verdict.vulnerable = !verdict.findings.empty();
    return verdict;
}

RootVerdict analyze_method_level(const WholeProgramGraph& whole, Depth k)
{
    RootVerdict verdict;
    verdict.setting = AnalysisSetting { Granularity::MethodLevel, k };
    if (whole.owners().empty())
        return verdict;
    verdict.root = whole.root();

    constexpr auto none = std::numeric_limits<GlobalId>::max();
    const auto n = whole.nodes().size();
    std::vector<int> dist(n, -1);
    std::vector<GlobalId> parent(n, none);
    std::deque<GlobalId> queue;
    for (GlobalId id = 0; id < n; ++id) {
        if (whole.nodes()[id].owner == whole.root_owner()) {
            dist[id] = 0;
            queue.push_back(id);
        }
    }
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        for (const auto& e : whole.edges_from(u)) {
            if (dist[e.target] != -1)
                continue;
            dist[e.target] = dist[u] + 1;
            parent[e.target] = u;
            queue.push_back(e.target);
        }
    }

    std::vector<std::pair<GlobalId, Finding>> found;
    for (const auto& [id, advisories] : whole.vulnerable()) {
        if (whole.nodes()[id].owner == whole.root_owner() || dist[id] == -1)
            continue;
        std::vector<ChainStep> path;
        for (GlobalId at = id; at != none; at = parent[at])
            path.push_back(ChainStep { whole.owner_of(at), whole.nodes()[at].signature });
        std::reverse(path.begin(), path.end());
        for (const auto& advisory : advisories)
            found.emplace_back(id, Finding { advisory, whole.owner_of(id), VulnerableCallChain { advisory, path } });
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        return std::make_tuple(a.second.advisory_id, a.second.coordinate.to_string(), a.first)
            < std::make_tuple(b.second.advisory_id, b.second.coordinate.to_string(), b.first);
    });
    for (auto& [_, f] : found)
        verdict.findings.push_back(std::move(f));
    verdict.vulnerable = !verdict.findings.empty();
    return verdict;
}

std::vector<CoverageRow> coverage_curve(const std::map<std::string, std::vector<SweepEntry>>& corpus)
{
    std::set<Depth> depths;
    std::size_t denominator = 0;
    for (const auto& [root, entries] : corpus) {
        bool has_max = false;
        for (const auto& e : entries) {
            depths.insert(e.depth);
            if (e.depth.is_max()) {
                has_max = true;
                denominator += e.verdict.vulnerable ? 1 : 0;
            }
        }
        if (!has_max)
            throw std::invalid_argument("root " + root + " was not analyzed at max depth");
    }

    std::vector<CoverageRow> rows;
    for (const auto& d : depths) {
        CoverageRow row;
        row.depth = d;
        for (const auto& [_, entries] : corpus) {
            for (const auto& e : entries) {
                if (e.depth == d && e.verdict.vulnerable)
                    ++row.vulnerable_roots;
            }
        }
        if (denominator > 0)
            row.ratio = static_cast<double>(row.vulnerable_roots) / static_cast<double>(denominator);
        rows.push_back(row);
    }
    return rows;
}

} // namespace sca
