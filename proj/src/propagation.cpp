#include "sgc/propagation.hpp"

#include <cmath>

#include "sgc/error.hpp"

namespace sgc {

std::string to_string(PropagationKind kind) {
    switch (kind) {
        case PropagationKind::NormalizedAdjacency: return "norm_adj";
        case PropagationKind::RandomWalk: return "rw";
        case PropagationKind::AugNormalizedAdjacency: return "aug_norm_adj";
        case PropagationKind::AugRandomWalk: return "aug_rw";
        case PropagationKind::FirstOrderCheby: return "first_order_cheby";
    }
    throw ValueError("unknown propagation kind");
}

PropagationKind propagation_kind_from_string(const std::string& name) {
    if (name == "norm_adj") return PropagationKind::NormalizedAdjacency;
    if (name == "rw") return PropagationKind::RandomWalk;
    if (name == "aug_norm_adj") return PropagationKind::AugNormalizedAdjacency;
    if (name == "aug_rw") return PropagationKind::AugRandomWalk;
    if (name == "first_order_cheby") return PropagationKind::FirstOrderCheby;
    throw ValueError("unknown propagation kind: " + name);
}

bool is_augmented(PropagationKind kind) {
    return kind == PropagationKind::AugNormalizedAdjacency ||
           kind == PropagationKind::AugRandomWalk;
}

void PropagationSpec::validate() const {
    if (K < 0) throw ValueError("propagation K must be >= 0");
    if (gamma < 0.0 || !std::isfinite(gamma))
        throw ValueError("propagation gamma must be finite and >= 0");
    if (is_augmented(kind) && gamma <= 0.0)
        throw ValueError("augmented propagation requires gamma > 0");
}

namespace {

void require_no_isolated(const Graph& g, PropagationKind kind) {
    for (std::size_t i = 0; i < g.n; ++i)
        if (g.degrees[i] == 0.0)
            throw IsolatedNodeError("node " + std::to_string(i) +
                                    " is isolated; kind " + to_string(kind) +
                                    " requires positive degrees");
}

}  // namespace

SparseMatrix build_propagation(const Graph& graph, const PropagationSpec& spec) {
    spec.validate();
    const SparseMatrix& a = graph.adjacency;
    std::vector<Triplet> triplets;
    triplets.reserve(a.nnz() + graph.n);

    switch (spec.kind) {
        case PropagationKind::NormalizedAdjacency:
        case PropagationKind::FirstOrderCheby: {
            require_no_isolated(graph, spec.kind);
            std::vector<double> inv_sqrt(graph.n);
            for (std::size_t i = 0; i < graph.n; ++i)
                inv_sqrt[i] = 1.0 / std::sqrt(graph.degrees[i]);
            for (std::size_t r = 0; r < graph.n; ++r)
                for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
                    triplets.push_back({r, a.col_indices[k],
                                        inv_sqrt[r] * a.values[k] *
                                            inv_sqrt[a.col_indices[k]]});
            if (spec.kind == PropagationKind::FirstOrderCheby)
                for (std::size_t i = 0; i < graph.n; ++i) triplets.push_back({i, i, 1.0});
            break;
        }
        case PropagationKind::RandomWalk: {
            require_no_isolated(graph, spec.kind);
            for (std::size_t r = 0; r < graph.n; ++r)
                for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
                    triplets.push_back(
                        {r, a.col_indices[k], a.values[k] / graph.degrees[r]});
            break;
        }
        case PropagationKind::AugNormalizedAdjacency: {
            std::vector<double> inv_sqrt(graph.n);
            for (std::size_t i = 0; i < graph.n; ++i)
                inv_sqrt[i] = 1.0 / std::sqrt(graph.degrees[i] + spec.gamma);
            for (std::size_t r = 0; r < graph.n; ++r)
                for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
                    triplets.push_back({r, a.col_indices[k],
                                        inv_sqrt[r] * a.values[k] *
                                            inv_sqrt[a.col_indices[k]]});
            for (std::size_t i = 0; i < graph.n; ++i)
                triplets.push_back({i, i, spec.gamma * inv_sqrt[i] * inv_sqrt[i]});
            break;
        }
        case PropagationKind::AugRandomWalk: {
            for (std::size_t r = 0; r < graph.n; ++r) {
                const double inv = 1.0 / (graph.degrees[r] + spec.gamma);
                for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
                    triplets.push_back({r, a.col_indices[k], a.values[k] * inv});
                triplets.push_back({r, r, spec.gamma * inv});
            }
            break;
        }
    }
    return csr_from_triplets(triplets, graph.n, graph.n);
}

DenseMatrix propagate(const SparseMatrix& s, const DenseMatrix& x, int K,
                      std::size_t n_threads) {
    if (s.n_rows != s.n_cols) throw ShapeError("propagate: S must be square");
    if (s.n_cols != x.n_rows)
        throw ShapeError("propagate: S is " + std::to_string(s.n_rows) + "x" +
                         std::to_string(s.n_cols) + " but X has " +
                         std::to_string(x.n_rows) + " rows");
    if (K < 0) throw ValueError("propagate: K must be >= 0");

    DenseMatrix result = x;
    for (int step = 0; step < K; ++step) result = spmm(s, result, n_threads);
    return result;
}

}  // namespace sgc
