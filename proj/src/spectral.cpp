#include "sgc/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "sgc/error.hpp"

namespace sgc {

namespace {

constexpr double kSymmetryTol = 1e-12;

void require_square(const SparseMatrix& m, const char* who) {
    if (m.n_rows != m.n_cols)
        throw ShapeError(std::string(who) + ": matrix is " + std::to_string(m.n_rows) +
                         "x" + std::to_string(m.n_cols));
}

void require_symmetric(const SparseMatrix& m, const char* who) {
    require_square(m, who);
    const double asym = asymmetry(m);
    if (asym > kSymmetryTol)
        throw AsymmetricError(std::string(who) + ": max |m_ij - m_ji| = " +
                              std::to_string(asym));
}

Eigen::MatrixXd to_eigen(const SparseMatrix& m) {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.n_rows),
                                                  static_cast<Eigen::Index>(m.n_cols));
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k)
            dense(static_cast<Eigen::Index>(r),
                  static_cast<Eigen::Index>(m.col_indices[k])) = m.values[k];
    return dense;
}

std::vector<double> dense_eigenvalues_only(const SparseMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.compute(to_eigen(m), Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

// Eigenvalues (and, when z is non-null, eigenvectors accumulated into z) of a
// symmetric tridiagonal matrix: implicit-shift QL, the classical tql2
// scheme. diag has length k; sub[i] couples i and i+1 (length >= k-1).
// Results come back ascending. Used by the Lanczos path so that it stays
// independent of the dense solver it is cross-checked against.
void tridiagonal_ql(std::vector<double>& diag, std::vector<double> sub, DenseMatrix* z) {
    const std::size_t k = diag.size();
    if (k == 0) return;
    sub.resize(k, 0.0);
    if (z) {
        *z = DenseMatrix::identity(k);
    }
    const double eps = std::numeric_limits<double>::epsilon();

    for (std::size_t l = 0; l < k; ++l) {
        std::size_t iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < k; ++m) {
                const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
                if (std::abs(sub[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw ConvergenceError("tridiagonal QL failed to converge",
                                           std::abs(sub[l]));
                double g = (diag[l + 1] - diag[l]) / (2.0 * sub[l]);
                double r = std::hypot(g, 1.0);
                g = diag[m] - diag[l] + sub[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t ii = m; ii-- > l;) {
                    double f = s * sub[ii];
                    const double b = c * sub[ii];
                    r = std::hypot(f, g);
                    sub[ii + 1] = r;
                    if (r == 0.0) {
                        diag[ii + 1] -= p;
                        sub[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = diag[ii + 1] - p;
                    r = (diag[ii] - g) * s + 2.0 * c * b;
                    p = s * r;
                    diag[ii + 1] = g + p;
                    g = c * r - b;
                    if (z) {
                        for (std::size_t w = 0; w < k; ++w) {
                            f = (*z)(w, ii + 1);
                            (*z)(w, ii + 1) = s * (*z)(w, ii) + c * f;
                            (*z)(w, ii) = c * (*z)(w, ii) - s * f;
                        }
                    }
                }
                if (underflow) continue;
                diag[l] -= p;
                sub[l] = g;
                sub[m] = 0.0;
            }
        } while (m != l);
    }

    // selection sort ascending, dragging eigenvector columns along
    for (std::size_t i = 0; i + 1 < k; ++i) {
        std::size_t lo = i;
        for (std::size_t j = i + 1; j < k; ++j)
            if (diag[j] < diag[lo]) lo = j;
        if (lo != i) {
            std::swap(diag[i], diag[lo]);
            if (z)
                for (std::size_t w = 0; w < k; ++w) std::swap((*z)(w, i), (*z)(w, lo));
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void csr_matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        double s = 0.0;
        for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k)
            s += m.values[k] * x[m.col_indices[k]];
        y[r] = s;
    }
}

struct RitzPair {
    double value = 0.0;
    std::vector<double> vector;
    double residual = std::numeric_limits<double>::infinity();
};

double explicit_residual(const SparseMatrix& m, double theta, std::span<const double> y) {
    std::vector<double> my(y.size());
    csr_matvec(m, y, my);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = my[i] - theta * y[i];
        s += r * r;
    }
    return std::sqrt(s);
}

// Largest eigenvalue of a symmetric matrix by restarted Lanczos with full
// reorthogonalization. The start vector is fixed (all-ones with +1 at index
// 0, normalized) so runs need no seed. Accepts once the explicit residual
// drops to residual_target.
RitzPair lanczos_largest(const SparseMatrix& m, double residual_target,
                         const EigenSolveOptions& opts) {
    const std::size_t n = m.n_rows;
    if (n == 1) {
        RitzPair out;
        out.value = m.nnz() == 1 ? m.values[0] : 0.0;
        out.vector = {1.0};
        out.residual = 0.0;
        return out;
    }
    const double scale = std::max(inf_norm(m), 1e-300);
    const std::size_t kdim = std::max<std::size_t>(2, std::min(n, opts.krylov_dim));

    std::vector<double> start(n, 1.0);
    start[0] += 1.0;
    {
        const double nv = norm2(start);
        for (double& x : start) x /= nv;
    }

    RitzPair best;
    std::size_t matvecs = 0;

    while (true) {
        std::vector<std::vector<double>> basis;
        basis.push_back(start);
        std::vector<double> alpha, beta;
        std::vector<double> w(n);

        for (std::size_t j = 0; j < kdim; ++j) {
            if (matvecs >= opts.max_iterations)
                throw ConvergenceError(
                    "Lanczos: no convergence after " + std::to_string(matvecs) +
                        " matrix-vector products (best residual " +
                        std::to_string(best.residual) + ")",
                    best.residual);
            csr_matvec(m, basis[j], w);
            ++matvecs;
            const double a = dot(w, basis[j]);
            alpha.push_back(a);
            for (std::size_t i = 0; i < n; ++i) w[i] -= a * basis[j][i];
            if (j > 0)
                for (std::size_t i = 0; i < n; ++i) w[i] -= beta[j - 1] * basis[j - 1][i];
            // full reorthogonalization, two classical Gram-Schmidt sweeps
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) {
                    const double c = dot(w, q);
                    for (std::size_t i = 0; i < n; ++i) w[i] -= c * q[i];
                }
            const double b = norm2(w);

            // Ritz extraction on the current tridiagonal section
            std::vector<double> theta = alpha;
            DenseMatrix z;
            tridiagonal_ql(theta, beta, &z);
            const std::size_t top = theta.size() - 1;
            const double estimate = b * std::abs(z(theta.size() - 1, top));

            const bool breakdown = b <= 1e-14 * scale;
            if (estimate <= residual_target || breakdown || j + 1 == kdim) {
                std::vector<double> y(n, 0.0);
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    const double s = z(i, top);
                    for (std::size_t r = 0; r < n; ++r) y[r] += s * basis[i][r];
                }
                const double ny = norm2(y);
                for (double& x : y) x /= ny;
                const double res = explicit_residual(m, theta[top], y);
                if (res < best.residual) {
                    best.value = theta[top];
                    best.vector = y;
                    best.residual = res;
                }
                if (best.residual <= residual_target || breakdown) return best;
                if (j + 1 == kdim) {
                    start = std::move(y);  // restart from the current Ritz vector
                    break;
                }
            }
            beta.push_back(b);
            for (double& x : w) x /= b;
            basis.push_back(w);
        }
    }
}

SparseMatrix gershgorin_shifted_negation(const SparseMatrix& m, double& sigma_out) {
    // sigma = max_i (m_ii + sum_{j != i} |m_ij|), an upper bound on the
    // spectrum; sigma I - M turns the smallest eigenvalue into the largest.
    double sigma = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        double diag = 0.0, off = 0.0;
        for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
            if (m.col_indices[k] == r)
                diag = m.values[k];
            else
                off += std::abs(m.values[k]);
        }
        sigma = std::max(sigma, diag + off);
    }
    if (!std::isfinite(sigma)) sigma = 0.0;
    sigma_out = sigma;

    std::vector<Triplet> triplets = to_triplets(m);
    for (Triplet& t : triplets) t.value = -t.value;
    for (std::size_t i = 0; i < m.n_rows; ++i) triplets.push_back({i, i, sigma});
    return csr_from_triplets(triplets, m.n_rows, m.n_cols);
}

double ipow(double x, int k) {
    double out = 1.0;
    for (int i = 0; i < k; ++i) out *= x;
    return out;
}

// D~^{-1/2} A D~^{-1/2}: the augmented degree scaling applied to the bare
// adjacency (no self-loop term), the alpha operator of the spectrum bounds.
SparseMatrix aug_scaled_adjacency(const Graph& graph, double gamma) {
    std::vector<double> inv_sqrt(graph.n);
    for (std::size_t i = 0; i < graph.n; ++i)
        inv_sqrt[i] = 1.0 / std::sqrt(graph.degrees[i] + gamma);
    std::vector<Triplet> triplets;
    triplets.reserve(graph.adjacency.nnz());
    const SparseMatrix& a = graph.adjacency;
    for (std::size_t r = 0; r < graph.n; ++r)
        for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
            triplets.push_back(
                {r, a.col_indices[k], inv_sqrt[r] * a.values[k] * inv_sqrt[a.col_indices[k]]});
    return csr_from_triplets(triplets, graph.n, graph.n);
}

}  // namespace

SparseMatrix laplacian(const Graph& graph, bool augmented, double gamma) {
    PropagationSpec spec;
    spec.kind = augmented ? PropagationKind::AugNormalizedAdjacency
                          : PropagationKind::NormalizedAdjacency;
    spec.gamma = gamma;
    spec.K = 1;
    const SparseMatrix s = build_propagation(graph, spec);

    std::vector<Triplet> triplets = to_triplets(s);
    for (Triplet& t : triplets) t.value = -t.value;
    for (std::size_t i = 0; i < graph.n; ++i) triplets.push_back({i, i, 1.0});
    return csr_from_triplets(triplets, graph.n, graph.n);
}

EigenDecomposition dense_eigendecomposition(const SparseMatrix& m, std::size_t dense_cap) {
    require_symmetric(m, "dense_eigendecomposition");
    if (m.n_rows > dense_cap)
        throw SizeError("dense_eigendecomposition: n = " + std::to_string(m.n_rows) +
                        " exceeds cap " + std::to_string(dense_cap));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m));
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("dense eigendecomposition failed", 0.0);

    EigenDecomposition out;
    const auto& ev = solver.eigenvalues();
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    const auto& u = solver.eigenvectors();
    out.eigenvectors = DenseMatrix(m.n_rows, m.n_rows);
    for (std::size_t i = 0; i < m.n_rows; ++i)
        for (std::size_t j = 0; j < m.n_rows; ++j)
            out.eigenvectors(i, j) =
                u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

std::vector<double> dense_eigenvalues(const SparseMatrix& m, std::size_t dense_cap) {
    require_symmetric(m, "dense_eigenvalues");
    if (m.n_rows > dense_cap)
        throw SizeError("dense_eigenvalues: n = " + std::to_string(m.n_rows) +
                        " exceeds cap " + std::to_string(dense_cap));
    return dense_eigenvalues_only(m);
}

ExtremeEigenvalues extreme_eigenvalues(const SparseMatrix& m, double tol,
                                       const EigenSolveOptions& opts) {
    if (tol <= 0.0) throw ValueError("extreme_eigenvalues: tol must be > 0");
    require_symmetric(m, "extreme_eigenvalues");
    if (m.n_rows == 0) throw ShapeError("extreme_eigenvalues: empty matrix");

    if (m.n_rows <= opts.dense_cap) {
        const std::vector<double> ev = dense_eigenvalues_only(m);
        return {ev.front(), ev.back()};
    }

    const double residual_target = tol * std::max(inf_norm(m), 1e-300);
    const RitzPair top = lanczos_largest(m, residual_target, opts);

    double sigma = 0.0;
    const SparseMatrix shifted = gershgorin_shifted_negation(m, sigma);
    const RitzPair bottom = lanczos_largest(shifted, residual_target, opts);

    return {sigma - bottom.value, top.value};
}

FilterCurve filter_response(PropagationKind kind, int K, std::span<const double> lambdas) {
    if (K < 0) throw ValueError("filter_response: K must be >= 0");
    FilterCurve curve;
    curve.kind = kind;
    curve.K = K;
    curve.points.reserve(lambdas.size());
    const double base_shift = kind == PropagationKind::FirstOrderCheby ? 2.0 : 1.0;
    for (double lambda : lambdas)
        curve.points.emplace_back(lambda, ipow(base_shift - lambda, K));
    return curve;
}

std::vector<double> spectral_coefficients(const DenseMatrix& u, std::span<const double> x) {
    if (u.n_rows != x.size())
        throw ShapeError("spectral_coefficients: basis has " + std::to_string(u.n_rows) +
                         " rows, signal has " + std::to_string(x.size()));
    std::vector<double> coeffs(u.n_cols, 0.0);
    for (std::size_t i = 0; i < u.n_rows; ++i) {
        const double xi = x[i];
        const double* row = u.values.data() + i * u.n_cols;
        for (std::size_t j = 0; j < u.n_cols; ++j) coeffs[j] += row[j] * xi;
    }
    return coeffs;
}

SpectrumReport spectrum_quantities(const Graph& graph, double gamma, double tol,
                                   const EigenSolveOptions& opts) {
    if (gamma <= 0.0 || !std::isfinite(gamma))
        throw ValueError("spectrum_quantities: gamma must be > 0");
    if (graph.n == 0) throw ValueError("spectrum_quantities: empty graph");
    if (graph.has_isolated_node())
        throw IsolatedNodeError("spectrum_quantities: graph has an isolated node");

    SpectrumReport report;
    report.gamma = gamma;
    report.tolerance = tol;

    const auto lap = extreme_eigenvalues(laplacian(graph, false), tol, opts);
    report.lambda_min = lap.lambda_min;
    report.lambda_max = lap.lambda_max;

    const auto aug = extreme_eigenvalues(laplacian(graph, true, gamma), tol, opts);
    report.aug_lambda_min = aug.lambda_min;
    report.aug_lambda_max = aug.lambda_max;

    // beta: spectrum of D^{-1/2} A D^{-1/2} = I - Laplacian, an exact shift.
    report.beta_min = 1.0 - report.lambda_max;
    report.beta_max = 1.0 - report.lambda_min;

    const auto alpha = extreme_eigenvalues(aug_scaled_adjacency(graph, gamma), tol, opts);
    report.alpha_min = alpha.lambda_min;
    report.alpha_max = alpha.lambda_max;

    const double max_d = graph.max_degree();
    const double min_d = graph.min_degree();
    report.theorem1_holds = std::abs(report.lambda_min) <= tol &&
                            std::abs(report.aug_lambda_min) <= tol &&
                            report.aug_lambda_max < report.lambda_max - tol;
    report.lemma3_lower_holds =
        report.alpha_min >= (max_d / (gamma + max_d)) * report.beta_min - tol;
    report.lemma3_upper_holds = report.alpha_max <= min_d / (gamma + min_d) + tol;
    return report;
}

SpectrumReport verify_spectrum_theorem(const Graph& graph, double gamma, double tol,
                                       const EigenSolveOptions& opts) {
    if (gamma <= 0.0 || !std::isfinite(gamma))
        throw ValueError("verify_spectrum_theorem: gamma must be > 0");
    if (graph.n == 0) throw ValueError("verify_spectrum_theorem: empty graph");
    if (graph.has_isolated_node())
        throw IsolatedNodeError("verify_spectrum_theorem: graph has an isolated node");

    if (graph.n <= opts.dense_cap) {
        const std::vector<double> ev = dense_eigenvalues_only(laplacian(graph, false));
        if (ev.size() >= 2 && ev[1] <= tol)
            throw DisconnectedError(
                "verify_spectrum_theorem: zero eigenvalue of the normalized Laplacian has "
                "multiplicity > 1 (second eigenvalue " +
                std::to_string(ev[1]) + ")");
    } else if (!is_connected(graph)) {
        throw DisconnectedError("verify_spectrum_theorem: graph is disconnected");
    }

    return spectrum_quantities(graph, gamma, tol, opts);
}

}  // namespace sgc
