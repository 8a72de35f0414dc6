#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sgc/graph.hpp"
#include "sgc/propagation.hpp"

namespace sgc {

struct EigenSolveOptions {
    std::size_t dense_cap = 4096;    // dense symmetric solve at or below this order
    std::size_t max_iterations = 500;  // total Lanczos matvecs across restarts
    std::size_t krylov_dim = 200;    // per-restart Krylov dimension cap
};

// Normalized Laplacian I - D^{-1/2} A D^{-1/2}, or its augmented form
// I - D~^{-1/2} (A + gamma I) D~^{-1/2} when augmented is set.
SparseMatrix laplacian(const Graph& graph, bool augmented, double gamma = 1.0);

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    DenseMatrix eigenvectors;         // column j pairs with eigenvalues[j]
};

// Full symmetric eigendecomposition; SizeError above dense_cap,
// AsymmetricError when max |m_ij - m_ji| > 1e-12.
EigenDecomposition dense_eigendecomposition(const SparseMatrix& m,
                                            std::size_t dense_cap = 4096);

// Ascending eigenvalues only (same checks, no eigenvector work).
std::vector<double> dense_eigenvalues(const SparseMatrix& m, std::size_t dense_cap = 4096);

struct ExtremeEigenvalues {
    double lambda_min;
    double lambda_max;
};

// Smallest and largest eigenvalue of a symmetric matrix. Dense solve at or
// below opts.dense_cap; above it, Lanczos with full reorthogonalization on M
// for the largest and on (sigma I - M) for the smallest, sigma being the
// Gershgorin upper bound. Lanczos accepts a Ritz pair once the explicit
// residual ||Mv - lambda v|| is at most tol * ||M||_inf, and throws
// ConvergenceError carrying the best residual after opts.max_iterations
// matrix-vector products.
ExtremeEigenvalues extreme_eigenvalues(const SparseMatrix& m, double tol,
                                       const EigenSolveOptions& opts = {});

struct FilterCurve {
    PropagationKind kind;
    int K = 0;
    std::vector<std::pair<double, double>> points;  // (lambda, g_hat)
};

// Spectral response of K propagation steps as a function of the matching
// Laplacian eigenvalue: (1 - lambda)^K for the adjacency-based kinds,
// (2 - lambda)^K for first-order Chebyshev.
FilterCurve filter_response(PropagationKind kind, int K, std::span<const double> lambdas);

// Graph Fourier coefficients U^T x.
std::vector<double> spectral_coefficients(const DenseMatrix& u, std::span<const double> x);

struct SpectrumReport {
    double gamma = 1.0;
    double lambda_min = 0.0;      // smallest eigenvalue of the normalized Laplacian
    double lambda_max = 0.0;      // largest
    double aug_lambda_min = 0.0;  // same for the augmented Laplacian
    double aug_lambda_max = 0.0;
    double alpha_min = 0.0;  // extremes of D~^{-1/2} A D~^{-1/2}
    double alpha_max = 0.0;
    double beta_min = 0.0;  // extremes of D^{-1/2} A D^{-1/2}
    double beta_max = 0.0;
    bool theorem1_holds = false;      // 0 = lambda_1 = aug_lambda_1 < aug_lambda_n < lambda_n
    bool lemma3_lower_holds = false;  // alpha_1 >= max_d/(gamma+max_d) * beta_1 - tol
    bool lemma3_upper_holds = false;  // alpha_n <= min_d/(gamma+min_d) + tol
    double tolerance = 1e-8;
};

// Eigenvalue extremes of the four operators plus the shrink/bound booleans.
// Requires a graph without isolated nodes; does not require connectivity.
SpectrumReport spectrum_quantities(const Graph& graph, double gamma, double tol = 1e-8,
                                   const EigenSolveOptions& opts = {});

// spectrum_quantities plus the connectivity gate: a disconnected graph is
// rejected with DisconnectedError (detected as a multiple zero eigenvalue of
// the normalized Laplacian on the dense path, by traversal above the cap).
SpectrumReport verify_spectrum_theorem(const Graph& graph, double gamma, double tol = 1e-8,
                                       const EigenSolveOptions& opts = {});

}  // namespace sgc
