#include "dkgqa/steiner.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>
#include <utility>

namespace dkgqa::graph {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0U);
}

std::uint32_t DisjointSets::find(std::uint32_t x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool DisjointSets::unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
}

std::vector<std::uint32_t> component_labels(std::size_t node_count, std::span<const Edge> edges) {
    DisjointSets sets(node_count);
    for (const auto& e : edges) sets.unite(e.u, e.v);
    std::vector<std::uint32_t> labels(node_count);
    for (std::uint32_t i = 0; i < node_count; ++i) labels[i] = sets.find(i);
    return labels;
}

std::vector<std::size_t> mehlhorn_steiner(std::size_t node_count, std::span<const Edge> edges,
                                          std::span<const std::uint32_t> terminals) {
    constexpr auto kUnreached = std::numeric_limits<std::uint32_t>::max();
    constexpr auto kNoEdge = std::numeric_limits<std::size_t>::max();

    std::vector<std::uint32_t> sorted_terminals(terminals.begin(), terminals.end());
    std::sort(sorted_terminals.begin(), sorted_terminals.end());
    sorted_terminals.erase(std::unique(sorted_terminals.begin(), sorted_terminals.end()), sorted_terminals.end());
    if (sorted_terminals.size() < 2) return {};

    // Adjacency as (neighbour, edge index), sorted for deterministic BFS order.
    std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> adj(node_count);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (e.u == e.v) continue;
        adj[e.u].emplace_back(e.v, i);
        adj[e.v].emplace_back(e.u, i);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());

    // 1. Voronoi regions by multi-source BFS.
    std::vector<std::uint32_t> dist(node_count, kUnreached);
    std::vector<std::uint32_t> base(node_count, kUnreached);
    std::vector<std::size_t> pred_edge(node_count, kNoEdge);
    std::queue<std::uint32_t> frontier;
    for (const auto t : sorted_terminals) {
        dist[t] = 0;
        base[t] = t;
        frontier.push(t);
    }
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (const auto& [v, ei] : adj[u]) {
            if (dist[v] != kUnreached) continue;
            dist[v] = dist[u] + 1;
            base[v] = base[u];
            pred_edge[v] = ei;
            frontier.push(v);
        }
    }

    // 2. Auxiliary graph: cheapest boundary edge per terminal pair.
    struct AuxEdge {
        std::uint32_t weight;
        std::size_t edge;
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, AuxEdge> aux;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (e.u == e.v || dist[e.u] == kUnreached || dist[e.v] == kUnreached) continue;
        const auto bu = base[e.u];
        const auto bv = base[e.v];
        if (bu == bv) continue;
        const auto key = std::minmax(bu, bv);
        const std::uint32_t w = dist[e.u] + 1 + dist[e.v];
        auto [it, inserted] = aux.try_emplace({key.first, key.second}, AuxEdge{w, i});
        if (!inserted && w < it->second.weight) it->second = AuxEdge{w, i};
    }

    // 3. Kruskal over the auxiliary graph.
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::size_t>> order;
    order.reserve(aux.size());
    for (const auto& [key, a] : aux) order.emplace_back(a.weight, key.first, key.second, a.edge);
    std::sort(order.begin(), order.end());
    DisjointSets terminal_sets(node_count);

    // 4. Expand each chosen auxiliary edge into its shortest path.
    std::vector<char> chosen(edges.size(), 0);
    for (const auto& [w, a, b, ei] : order) {
        if (!terminal_sets.unite(a, b)) continue;
        chosen[ei] = 1;
        for (auto x : {edges[ei].u, edges[ei].v}) {
            while (pred_edge[x] != kNoEdge) {
                const auto pe = pred_edge[x];
                chosen[pe] = 1;
                x = (edges[pe].u == x) ? edges[pe].v : edges[pe].u;
            }
        }
    }

    // The expansion is a forest already; a spanning-forest pass guards the
    // invariant before pruning.
    DisjointSets forest(node_count);
    std::vector<std::uint32_t> degree(node_count, 0);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!chosen[i]) continue;
        if (!forest.unite(edges[i].u, edges[i].v)) {
            chosen[i] = 0;
            continue;
        }
        ++degree[edges[i].u];
        ++degree[edges[i].v];
    }

    // 5. Prune non-terminal leaves until none remain.
    std::vector<char> is_terminal(node_count, 0);
    for (const auto t : sorted_terminals) is_terminal[t] = 1;
    std::vector<std::vector<std::size_t>> incident(node_count);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!chosen[i]) continue;
        incident[edges[i].u].push_back(i);
        incident[edges[i].v].push_back(i);
    }
    std::vector<std::uint32_t> leaves;
    for (std::uint32_t x = 0; x < node_count; ++x) {
        if (degree[x] == 1 && !is_terminal[x]) leaves.push_back(x);
    }
    while (!leaves.empty()) {
        const auto x = leaves.back();
        leaves.pop_back();
        if (degree[x] != 1) continue;
        for (const auto ei : incident[x]) {
            if (!chosen[ei]) continue;
            chosen[ei] = 0;
            --degree[x];
            const auto y = (edges[ei].u == x) ? edges[ei].v : edges[ei].u;
            if (--degree[y] == 1 && !is_terminal[y]) leaves.push_back(y);
            break;
        }
    }

    std::vector<std::size_t> result;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (chosen[i]) result.push_back(i);
    }
    return result;
}

}  // namespace dkgqa::graph
