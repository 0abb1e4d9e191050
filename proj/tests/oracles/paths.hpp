#pragma once

#include <climits>
#include <functional>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Edges = std::set<std::pair<int, int>>;

// Shortest hop count from any source to every node, found by enumerating every
// simple path. Exponential; meant for graphs of a dozen nodes.
inline std::vector<std::optional<int>> shortest_by_enumeration(int n, const Edges& edges, const std::vector<int>& sources)
{
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (const auto& [a, b] : edges)
        out[static_cast<std::size_t>(a)].push_back(b);
    std::vector<std::optional<int>> best(static_cast<std::size_t>(n));
    std::vector<bool> on_path(static_cast<std::size_t>(n), false);
    std::function<void(int, int)> walk = [&](int at, int length) {
        auto& b = best[static_cast<std::size_t>(at)];
        if (!b || length < *b)
            b = length;
        on_path[static_cast<std::size_t>(at)] = true;
        for (int next : out[static_cast<std::size_t>(at)])
            if (!on_path[static_cast<std::size_t>(next)])
                walk(next, length + 1);
        on_path[static_cast<std::size_t>(at)] = false;
    };
    for (int s : sources)
        walk(s, 0);
    return best;
}

// All-pairs hop distances; INT_MAX when unreachable.
inline std::vector<std::vector<int>> floyd_warshall(int n, const Edges& edges)
{
    std::vector<std::vector<int>> d(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), INT_MAX));
    for (int i = 0; i < n; ++i)
        d[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
    for (const auto& [a, b] : edges)
        if (a != b)
            d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    for (std::size_t k = 0; k < d.size(); ++k)
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t j = 0; j < d.size(); ++j)
                if (d[i][k] != INT_MAX && d[k][j] != INT_MAX && d[i][k] + d[k][j] < d[i][j])
                    d[i][j] = d[i][k] + d[k][j];
    return d;
}

} // namespace oracle
