#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "sgc/csr.hpp"

namespace sgc {

struct WeightedEdge {
    std::size_t u;
    std::size_t v;
    double weight = 1.0;
};

// How build_graph treats a repeated undirected edge {u, v}.
enum class DuplicatePolicy { Error, Sum, KeepFirst };

// Undirected weighted simple graph. adjacency is symmetric with a zero
// diagonal; degrees[i] is the row sum of adjacency row i. Isolated nodes
// (degree 0) are legal; operators that cannot handle them reject at their
// own boundary.
struct Graph {
    std::size_t n = 0;
    SparseMatrix adjacency;
    std::vector<double> degrees;

    double max_degree() const;
    double min_degree() const;
    bool has_isolated_node() const;
};

// Each input edge is one undirected edge, stored symmetrically. Self-loops
// are rejected (SelfLoopError); non-positive or non-finite weights are
// rejected (ValueError); repeats of the same unordered pair follow `policy`
// (default: DuplicateEdgeError).
Graph build_graph(std::span<const WeightedEdge> edges, std::size_t n,
                  DuplicatePolicy policy = DuplicatePolicy::Error);

// Throws if any Graph invariant is violated. Used by the test suites and the
// dataset loader.
void check_invariants(const Graph& g);

struct EdgeListFile {
    std::vector<WeightedEdge> edges;
    std::size_t min_node_count = 0;  // 1 + max node id seen (0 when empty)
};

// Edge-list text format: one edge per line, `u<TAB>v[<TAB>weight]`, 0-based
// ids, weight defaults to 1.0. Lines starting with '#' and blank lines are
// ignored. Parse problems report the 1-based line number.
EdgeListFile read_edge_list(const std::filesystem::path& path);

bool is_connected(const Graph& g);

}  // namespace sgc
