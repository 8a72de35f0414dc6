#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sgc/dataset.hpp"
#include "sgc/error.hpp"

using namespace sgc;

namespace {

// smallest legal bundle: one edge, one train node, one test node, two classes
void write_minimal(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "edges.tsv") << "0\t1\n";
    std::ofstream(dir / "features.tsv") << "0\t1.0\t0.0\n1\t0.0\t1.0\n";
    std::ofstream(dir / "labels.tsv") << "0\t0\n1\t1\n";
    std::ofstream(dir / "split.json") << R"({"train": [0], "val": [], "test": [1]})";
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("minimal fixture loads and validates") {
    const auto dir = fixtures::fresh_temp_dir("minimal");
    write_minimal(dir);
    const DatasetBundle b = load_dataset(dir);
    CHECK(b.graph.n == 2);
    CHECK(b.n_classes == 2);
    CHECK(b.features.n_cols == 2);
    CHECK(b.train_mask == std::vector<std::size_t>{0});
    CHECK(b.test_mask == std::vector<std::size_t>{1});
    CHECK(b.val_mask.empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic fixture round-trips through both feature formats") {
    const fixtures::SyntheticDataset ds = fixtures::make_planted(2024, 20, 3, 4);
    for (bool sparse : {true, false}) {
        const auto dir = fixtures::fresh_temp_dir(sparse ? "sp" : "dn");
        fixtures::write_dataset(ds, dir, sparse);
        const DatasetBundle b = load_dataset(dir);
        CHECK(b.graph.n == ds.n);
        CHECK(b.n_classes == ds.n_classes);
        CHECK(b.features.n_rows == ds.features.n_rows);
        CHECK(b.features.n_cols == ds.features.n_cols);
        CHECK(max_abs_diff(b.features, ds.features) == 0.0);
        CHECK(b.labels == ds.labels);
        CHECK(b.train_mask.size() == ds.train.size());
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("loader failure paths") {
    const auto dir = fixtures::fresh_temp_dir("bad");

    SUBCASE("missing file") {
        write_minimal(dir);
        std::filesystem::remove(dir / "labels.tsv");
        CHECK_THROWS_AS((void)load_dataset(dir), MissingFileError);
    }
    SUBCASE("mask overlap") {
        write_minimal(dir);
        std::ofstream(dir / "split.json") << R"({"train": [0], "val": [0], "test": [1]})";
        CHECK_THROWS_AS((void)load_dataset(dir), SplitError);
    }
    SUBCASE("unknown split key") {
        write_minimal(dir);
        std::ofstream(dir / "split.json")
            << R"({"train": [0], "val": [], "test": [1], "extra": []})";
        CHECK_THROWS_AS((void)load_dataset(dir), SplitError);
    }
    SUBCASE("masked node without a label") {
        write_minimal(dir);
        std::ofstream(dir / "labels.tsv") << "0\t0\n";
        CHECK_THROWS_AS((void)load_dataset(dir), SplitError);
    }
    SUBCASE("feature parse error names the line") {
        write_minimal(dir);
        std::ofstream(dir / "features.tsv") << "0\t1.0\t0.0\n1\tbroken\n";
        CHECK_THROWS_WITH_AS((void)load_dataset(dir), doctest::Contains(":2:"), ParseError);
    }
    SUBCASE("mixed sparse and dense feature rows") {
        write_minimal(dir);
        std::ofstream(dir / "features.tsv") << "0\t0:1.0\n1\t0.0\t1.0\n";
        CHECK_THROWS_AS((void)load_dataset(dir), ParseError);
    }
    SUBCASE("duplicate edge is surfaced") {
        write_minimal(dir);
        std::ofstream(dir / "edges.tsv") << "0\t1\n1\t0\n";
        CHECK_THROWS_AS((void)load_dataset(dir), DuplicateEdgeError);
    }
    SUBCASE("non-finite feature value") {
        write_minimal(dir);
        std::ofstream(dir / "features.tsv") << "0\tinf\t0.0\n1\t0.0\t1.0\n";
        CHECK_THROWS_AS((void)load_dataset(dir), ParseError);
    }
    SUBCASE("ragged dense rows") {
        write_minimal(dir);
        std::ofstream(dir / "features.tsv") << "0\t1.0\t0.0\n1\t0.5\n";
        CHECK_THROWS_WITH_AS((void)load_dataset(dir), doctest::Contains("expected 2"),
                             ParseError);
    }
    SUBCASE("duplicate sparse column") {
        write_minimal(dir);
        std::ofstream(dir / "features.tsv") << "0\t0:1 0:2\n1\t1:1\n";
        CHECK_THROWS_WITH_AS((void)load_dataset(dir), doctest::Contains("duplicate column"),
                             ParseError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("unlabeled nodes are legal outside the masks") {
    const auto dir = fixtures::fresh_temp_dir("unlabeled");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "edges.tsv") << "0\t1\n1\t2\n";
    std::ofstream(dir / "features.tsv") << "0\t0:1\n1\t1:1\n2\t0:0.5 1:0.5\n";
    std::ofstream(dir / "labels.tsv") << "0\t0\n1\t1\n2\t-1\n";
    std::ofstream(dir / "split.json") << R"({"train": [0], "val": [], "test": [1]})";
    const DatasetBundle b = load_dataset(dir);
    CHECK(b.labels[2] == -1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("row L1 normalization") {
    DenseMatrix x(3, 2);
    x(0, 0) = 2.0;
    x(0, 1) = 2.0;
    x(1, 0) = -1.0;
    x(1, 1) = 3.0;
    const DenseMatrix out = normalize_features(x, NormalizationMode::RowL1);
    CHECK(out(0, 0) == 0.5);
    CHECK(out(0, 1) == 0.5);
    CHECK(out(1, 0) == -0.25);
    CHECK(out(1, 1) == 0.75);
    CHECK(out(2, 0) == 0.0);  // zero row untouched
    CHECK(out(2, 1) == 0.0);

    Xoshiro256ss rng(149);
    const DenseMatrix r = oracle::random_dense(rng, 30, 7);
    const DenseMatrix n = normalize_features(r, NormalizationMode::RowL1);
    for (std::size_t i = 0; i < n.n_rows; ++i) {
        double norm = 0.0;
        for (double v : n.row(i)) norm += std::abs(v);
        CHECK((norm == 0.0 || std::abs(norm - 1.0) <= 1e-12));
    }
}

TEST_CASE("standardization") {
    DenseMatrix x(2, 2);
    x(0, 0) = 1.0;
    x(1, 0) = 3.0;
    x(0, 1) = 5.0;
    x(1, 1) = 5.0;
    const DenseMatrix out = normalize_features(x, NormalizationMode::Standardize);
    CHECK(out(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(out(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out(0, 1) == 0.0);  // constant column zeroed
    CHECK(out(1, 1) == 0.0);

    Xoshiro256ss rng(151);
    const DenseMatrix r = oracle::random_dense(rng, 40, 6, 0.0, 10.0);
    const DenseMatrix n = normalize_features(r, NormalizationMode::Standardize);
    for (std::size_t j = 0; j < n.n_cols; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n.n_rows; ++i) mean += n(i, j);
        mean /= static_cast<double>(n.n_rows);
        CHECK(std::abs(mean) <= 1e-10);
        double var = 0.0;
        for (std::size_t i = 0; i < n.n_rows; ++i) var += (n(i, j) - mean) * (n(i, j) - mean);
        var /= static_cast<double>(n.n_rows);
        const double sd = std::sqrt(var);
        CHECK((sd == 0.0 || (sd >= 1.0 - 1e-10 && sd <= 1.0 + 1e-10)));
    }
}

TEST_CASE("balanced split basics") {
    const std::vector<int> labels = {0, 0, 1, 1, -1, 1};
    const auto subset = random_balanced_split(labels, 2, 1, 7);
    REQUIRE(subset.size() == 2);
    CHECK(labels[subset[0]] == 0);
    CHECK(labels[subset[1]] == 1);

    CHECK(random_balanced_split(labels, 2, 1, 7) == subset);  // same seed, same subset
    CHECK_THROWS_WITH_AS((void)random_balanced_split(labels, 2, 3, 7),
                         doctest::Contains("class 0"), InsufficientClassError);
}

TEST_CASE("balanced split: exact counts and eligibility over many seeds") {
    Xoshiro256ss rng(157);
    std::vector<int> labels(60);
    for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = i % 7 == 0 ? -1 : static_cast<int>(rng.bounded(3));
    std::vector<std::size_t> exclude;
    for (std::size_t i = 0; i < labels.size(); i += 5) exclude.push_back(i);
    const std::set<std::size_t> excluded(exclude.begin(), exclude.end());

    std::set<std::vector<std::size_t>> distinct;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto subset = random_balanced_split(labels, 3, 2, seed, exclude);
        REQUIRE(subset.size() == 6);
        std::vector<int> count(3, 0);
        for (std::size_t i : subset) {
            CHECK(!excluded.count(i));
            REQUIRE(labels[i] >= 0);
            ++count[static_cast<std::size_t>(labels[i])];
        }
        CHECK(count == std::vector<int>{2, 2, 2});
        distinct.insert(subset);
    }
    CHECK(distinct.size() > 100);  // the sampler actually randomizes
}

}  // TEST_SUITE
