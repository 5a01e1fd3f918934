#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dkgqa::graph {

struct Edge {
    std::uint32_t u = 0;
    std::uint32_t v = 0;
};

/// Mehlhorn's 2(1 - 1/l) Steiner tree approximation on an undirected,
/// unit-weight graph:
///   1. multi-source BFS from all terminals (Voronoi regions),
///   2. auxiliary terminal graph from region-crossing edges,
///   3. minimum spanning forest of the auxiliary graph,
///   4. expansion of auxiliary edges into original shortest paths,
///   5. pruning of non-terminal leaves.
/// Each connected component holding at least two terminals yields one tree;
/// components with a single terminal contribute no edges. Returns indices
/// into `edges`, ascending. Self-loops are ignored. Ties are broken by
/// terminal order, then node id, then edge index, so results are
/// deterministic.
std::vector<std::size_t> mehlhorn_steiner(std::size_t node_count, std::span<const Edge> edges,
                                          std::span<const std::uint32_t> terminals);

/// Union-find with path halving and union by size.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n);
    std::uint32_t find(std::uint32_t x);
    bool unite(std::uint32_t a, std::uint32_t b);

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

/// Connected-component label per node over the given edges.
std::vector<std::uint32_t> component_labels(std::size_t node_count, std::span<const Edge> edges);

}  // namespace dkgqa::graph
