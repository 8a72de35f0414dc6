#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sgc/error.hpp"
#include "sgc/spectral.hpp"

using namespace sgc;

namespace {

Graph path2() {
    const WeightedEdge e[] = {{0, 1, 1.0}};
    return build_graph(e, 2);
}

Graph triangle() {
    const WeightedEdge e[] = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
    return build_graph(e, 3);
}

EigenSolveOptions force_lanczos() {
    EigenSolveOptions opts;
    opts.dense_cap = 0;
    return opts;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("laplacian of P2, plain and augmented") {
    const Graph g = path2();
    const DenseMatrix plain = to_dense(laplacian(g, false));
    CHECK(plain(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(plain(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(plain(1, 0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(plain(1, 1) == doctest::Approx(1.0).epsilon(1e-15));

    const DenseMatrix aug = to_dense(laplacian(g, true, 1.0));
    CHECK(aug(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(aug(0, 1) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("laplacian is I minus the matching propagation matrix") {
    Xoshiro256ss rng(67);
    const Graph g = fixtures::connected_erdos_renyi(rng, 18, 0.25, true);
    for (bool augmented : {false, true}) {
        PropagationSpec spec;
        spec.kind = augmented ? PropagationKind::AugNormalizedAdjacency
                              : PropagationKind::NormalizedAdjacency;
        spec.gamma = 1.0;
        const DenseMatrix lap = to_dense(laplacian(g, augmented, 1.0));
        const DenseMatrix s = to_dense(build_propagation(g, spec));
        for (std::size_t i = 0; i < g.n; ++i)
            for (std::size_t j = 0; j < g.n; ++j) {
                const double expected = (i == j ? 1.0 : 0.0) - s(i, j);
                CHECK(std::abs(lap(i, j) - expected) <= 1e-15);
            }
    }
}

TEST_CASE("dense eigendecomposition basics") {
    const std::vector<double> id_ev = dense_eigenvalues(SparseMatrix::identity(3));
    for (double v : id_ev) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    const std::vector<double> k3 = dense_eigenvalues(laplacian(triangle(), false));
    CHECK(k3[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(k3[1] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(k3[2] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("dense eigendecomposition reconstructs the matrix") {
    Xoshiro256ss rng(71);
    const SparseMatrix m = oracle::random_sparse_symmetric(rng, 20, 0.4);
    const EigenDecomposition eig = dense_eigendecomposition(m);
    const double scale = inf_norm(m);

    // residual columns M u_j = lambda_j u_j
    const DenseMatrix md = to_dense(m);
    for (std::size_t j = 0; j < 20; ++j) {
        double worst = 0.0;
        for (std::size_t i = 0; i < 20; ++i) {
            double mu = 0.0;
            for (std::size_t k = 0; k < 20; ++k) mu += md(i, k) * eig.eigenvectors(k, j);
            worst = std::max(worst, std::abs(mu - eig.eigenvalues[j] * eig.eigenvectors(i, j)));
        }
        CHECK(worst <= 1e-8 * std::max(scale, 1.0));
    }
    // orthonormality
    for (std::size_t a = 0; a < 20; ++a)
        for (std::size_t b = a; b < 20; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 20; ++i)
                dot += eig.eigenvectors(i, a) * eig.eigenvectors(i, b);
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-8);
        }
}

TEST_CASE("dense path rejections") {
    const SparseMatrix id4 = SparseMatrix::identity(4);
    CHECK_THROWS_AS((void)dense_eigendecomposition(id4, 3), SizeError);

    const Triplet asym[] = {{0, 1, 1.0}};
    const SparseMatrix bad = csr_from_triplets(asym, 2, 2);
    CHECK_THROWS_AS((void)dense_eigendecomposition(bad), AsymmetricError);
    CHECK_THROWS_AS((void)extreme_eigenvalues(bad, 1e-8), AsymmetricError);
}

TEST_CASE("extreme eigenvalues: hand-computed Laplacian spectra") {
    const auto p2 = extreme_eigenvalues(laplacian(path2(), false), 1e-10);
    CHECK(p2.lambda_min == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p2.lambda_max == doctest::Approx(2.0).epsilon(1e-12));

    const auto p2aug = extreme_eigenvalues(laplacian(path2(), true, 1.0), 1e-10);
    CHECK(p2aug.lambda_min == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p2aug.lambda_max == doctest::Approx(1.0).epsilon(1e-12));

    const auto k3 = extreme_eigenvalues(laplacian(triangle(), false), 1e-10);
    CHECK(k3.lambda_min == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(k3.lambda_max == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("Lanczos agrees with the dense path") {
    Xoshiro256ss rng(73);
    for (int round = 0; round < 6; ++round) {
        const Graph g = fixtures::connected_erdos_renyi(rng, 20 + rng.bounded(60), 0.12, true);
        const SparseMatrix lap = laplacian(g, round % 2 == 0, 1.0);
        const auto dense = extreme_eigenvalues(lap, 1e-8);
        const auto lanczos = extreme_eigenvalues(lap, 1e-10, force_lanczos());
        CHECK(std::abs(dense.lambda_min - lanczos.lambda_min) <= 1e-6);
        CHECK(std::abs(dense.lambda_max - lanczos.lambda_max) <= 1e-6);
    }
}

TEST_CASE("Lanczos on a matrix with known extremes") {
    // diag(1..400) stored sparsely: extremes are exactly 1 and 400
    std::vector<Triplet> ts;
    for (std::size_t i = 0; i < 400; ++i)
        ts.push_back({i, i, static_cast<double>(i + 1)});
    const SparseMatrix diag = csr_from_triplets(ts, 400, 400);
    const auto got = extreme_eigenvalues(diag, 1e-9, force_lanczos());
    CHECK(got.lambda_min == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(got.lambda_max == doctest::Approx(400.0).epsilon(1e-9));
}

TEST_CASE("Lanczos reports non-convergence with the best residual") {
    Xoshiro256ss rng(79);
    const SparseMatrix m = oracle::random_sparse_symmetric(rng, 60, 0.2);
    EigenSolveOptions opts = force_lanczos();
    opts.max_iterations = 3;
    opts.krylov_dim = 2;
    try {
        (void)extreme_eigenvalues(m, 1e-14, opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(std::isfinite(e.best_residual()));
        CHECK(e.best_residual() > 0.0);
    }
}

TEST_CASE("argument validation") {
    const SparseMatrix id3 = SparseMatrix::identity(3);
    CHECK_THROWS_AS((void)extreme_eigenvalues(id3, 0.0), ValueError);
    CHECK_THROWS_AS((void)extreme_eigenvalues(id3, -1e-6), ValueError);
    CHECK_THROWS_AS((void)filter_response(PropagationKind::RandomWalk, -1, {}), ValueError);

    const DenseMatrix u = DenseMatrix::identity(3);
    const std::vector<double> wrong_len = {1.0, 2.0};
    CHECK_THROWS_AS((void)spectral_coefficients(u, wrong_len), ShapeError);

    const WeightedEdge one[] = {{0, 1, 1.0}};
    const Graph isolated = build_graph(one, 3);
    CHECK_THROWS_AS((void)laplacian(isolated, false), IsolatedNodeError);
    CHECK_THROWS_AS((void)spectrum_quantities(isolated, 1.0), IsolatedNodeError);
}

TEST_CASE("filter response closed forms") {
    const double zeros[] = {0.0};
    CHECK(filter_response(PropagationKind::AugNormalizedAdjacency, 4, zeros).points[0].second ==
          1.0);
    CHECK(filter_response(PropagationKind::RandomWalk, 9, zeros).points[0].second == 1.0);
    CHECK(filter_response(PropagationKind::FirstOrderCheby, 6, zeros).points[0].second == 64.0);

    const double two[] = {2.0};
    CHECK(filter_response(PropagationKind::NormalizedAdjacency, 3, two).points[0].second ==
          -1.0);
}

TEST_CASE("spectral coefficients: identity basis and Parseval") {
    Xoshiro256ss rng(83);
    const DenseMatrix id = DenseMatrix::identity(5);
    const std::vector<double> x = {1.0, -2.0, 0.5, 3.0, 0.0};
    CHECK(spectral_coefficients(id, x) == x);

    const Graph g = fixtures::connected_erdos_renyi(rng, 24, 0.25);
    const EigenDecomposition eig = dense_eigendecomposition(laplacian(g, true, 1.0));
    std::vector<double> signal(g.n);
    for (double& v : signal) v = 2.0 * rng.next_double() - 1.0;
    const std::vector<double> coeffs = spectral_coefficients(eig.eigenvectors, signal);
    double nx = 0.0, nc = 0.0;
    for (double v : signal) nx += v * v;
    for (double v : coeffs) nc += v * v;
    CHECK(std::abs(std::sqrt(nx) - std::sqrt(nc)) <= 1e-10);
}

TEST_CASE("theorem verification on hand-computed graphs") {
    const SpectrumReport p2 = verify_spectrum_theorem(path2(), 1.0);
    CHECK(p2.lambda_min == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p2.lambda_max == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(p2.aug_lambda_min == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p2.aug_lambda_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p2.theorem1_holds);

    const SpectrumReport k3 = verify_spectrum_theorem(triangle(), 1.0);
    CHECK(k3.lambda_max == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(k3.aug_lambda_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k3.theorem1_holds);
    CHECK(k3.lemma3_lower_holds);
    CHECK(k3.lemma3_upper_holds);
}

TEST_CASE("disconnected and degenerate inputs are rejected") {
    const WeightedEdge two_pairs[] = {{0, 1, 1.0}, {2, 3, 1.0}};
    const Graph disconnected = build_graph(two_pairs, 4);
    CHECK_THROWS_AS((void)verify_spectrum_theorem(disconnected, 1.0), DisconnectedError);

    const WeightedEdge one[] = {{0, 1, 1.0}};
    const Graph isolated = build_graph(one, 3);
    CHECK_THROWS_AS((void)verify_spectrum_theorem(isolated, 1.0), IsolatedNodeError);
    CHECK_THROWS_AS((void)verify_spectrum_theorem(path2(), 0.0), ValueError);
}

TEST_CASE("theorem and lemma bounds on random graphs") {
    Xoshiro256ss rng(89);
    for (int round = 0; round < 20; ++round) {
        const Graph g =
            fixtures::connected_erdos_renyi(rng, 2 + rng.bounded(49), 0.2, round % 3 == 0);
        for (double gamma : {0.5, 1.0, 2.0}) {
            const SpectrumReport rep = verify_spectrum_theorem(g, gamma);
            CHECK(rep.theorem1_holds);
            CHECK(rep.lemma3_lower_holds);
            // non-negativity of the augmented Laplacian
            CHECK(rep.aug_lambda_min >= -1e-9);

            // the report's booleans are exactly their defining formulas
            const double max_d = g.max_degree();
            const double min_d = g.min_degree();
            CHECK(rep.lemma3_lower_holds ==
                  (rep.alpha_min >= (max_d / (gamma + max_d)) * rep.beta_min - rep.tolerance));
            CHECK(rep.lemma3_upper_holds ==
                  (rep.alpha_max <= min_d / (gamma + min_d) + rep.tolerance));

            // the max-degree form of the upper bound is the one that is
            // provable (multiply the Rayleigh bound by the largest value of
            // ||y||^2); it must hold on every graph, while the min-degree
            // form written into lemma3_upper_holds fails on irregular
            // graphs -- see the P3 case below
            CHECK(rep.alpha_max <= max_d / (gamma + max_d) + rep.tolerance);
        }
    }
}

TEST_CASE("min-degree upper bound counterexample: the 3-node path") {
    // degrees (1, 2, 1): alpha_max = 1/sqrt(3) ~ 0.577 exceeds
    // min_d/(gamma+min_d) = 0.5, while max_d/(gamma+max_d) = 2/3 holds
    const WeightedEdge e[] = {{0, 1, 1.0}, {1, 2, 1.0}};
    const Graph p3 = build_graph(e, 3);
    const SpectrumReport rep = verify_spectrum_theorem(p3, 1.0);
    CHECK(rep.alpha_max == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-10));
    CHECK(!rep.lemma3_upper_holds);
    CHECK(rep.alpha_max <= 2.0 / 3.0 + 1e-12);
    CHECK(rep.theorem1_holds);
    CHECK(rep.lemma3_lower_holds);
}

TEST_CASE("scaled constant vector is an exact null vector of the augmented Laplacian") {
    Xoshiro256ss rng(97);
    for (int round = 0; round < 10; ++round) {
        const Graph g = fixtures::erdos_renyi(rng, 3 + rng.bounded(40), 0.3);
        const double gamma = 0.5 + 2.0 * rng.next_double();
        const SparseMatrix lap = laplacian(g, true, gamma);
        DenseMatrix v(g.n, 1);
        for (std::size_t i = 0; i < g.n; ++i) v(i, 0) = std::sqrt(g.degrees[i] + gamma);
        const DenseMatrix lv = spmm(lap, v);
        double res = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) {
            res += lv(i, 0) * lv(i, 0);
            norm += v(i, 0) * v(i, 0);
        }
        CHECK(std::sqrt(res) <= 1e-10 * std::sqrt(norm));
    }
}

}  // TEST_SUITE
