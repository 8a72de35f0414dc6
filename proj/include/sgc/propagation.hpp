#pragma once

#include <string>

#include "sgc/graph.hpp"

namespace sgc {

enum class PropagationKind {
    NormalizedAdjacency,     // D^{-1/2} A D^{-1/2}
    RandomWalk,              // D^{-1} A
    AugNormalizedAdjacency,  // D~^{-1/2} (A + gamma I) D~^{-1/2}
    AugRandomWalk,           // D~^{-1} (A + gamma I)
    FirstOrderCheby,         // I + D^{-1/2} A D^{-1/2}
};

// Config-file names: norm_adj, rw, aug_norm_adj, aug_rw, first_order_cheby.
std::string to_string(PropagationKind kind);
PropagationKind propagation_kind_from_string(const std::string& name);

// True for the kinds that add gamma self-loops before normalizing.
bool is_augmented(PropagationKind kind);

struct PropagationSpec {
    PropagationKind kind = PropagationKind::AugNormalizedAdjacency;
    double gamma = 1.0;  // self-loop weight, used only by Aug* kinds
    int K = 2;           // propagation steps

    void validate() const;  // ValueError on gamma <= 0 for Aug* or K < 0
};

// The five propagation operators. Un-augmented kinds reject graphs with
// isolated nodes (IsolatedNodeError): their D^{-1/2} or D^{-1} does not
// exist there.
SparseMatrix build_propagation(const Graph& graph, const PropagationSpec& spec);

// S^K X as K successive sparse-dense products; S^K itself is never formed.
// K = 0 returns a copy of X.
DenseMatrix propagate(const SparseMatrix& s, const DenseMatrix& x, int K,
                      std::size_t n_threads = 0);

}  // namespace sgc
