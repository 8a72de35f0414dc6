#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "sgc/error.hpp"
#include "sgc/graph.hpp"

using namespace sgc;

TEST_SUITE("graph") {

TEST_CASE("single edge and triangle degrees") {
    const WeightedEdge one[] = {{0, 1, 1.0}};
    const Graph g1 = build_graph(one, 2);
    CHECK(g1.degrees == std::vector<double>{1.0, 1.0});

    const WeightedEdge tri[] = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
    const Graph g2 = build_graph(tri, 3);
    CHECK(g2.degrees == std::vector<double>{2.0, 2.0, 2.0});
    check_invariants(g2);
}

TEST_CASE("input validation") {
    const WeightedEdge self_loop[] = {{0, 0, 1.0}};
    CHECK_THROWS_AS((void)build_graph(self_loop, 2), SelfLoopError);

    const WeightedEdge bad_weight[] = {{0, 1, 0.0}};
    CHECK_THROWS_AS((void)build_graph(bad_weight, 2), ValueError);

    const WeightedEdge out_of_range[] = {{0, 5, 1.0}};
    CHECK_THROWS_AS((void)build_graph(out_of_range, 2), IndexError);
}

TEST_CASE("duplicate policies") {
    // the reversed pair counts as the same undirected edge
    const WeightedEdge dup[] = {{0, 1, 1.0}, {1, 0, 2.0}};
    CHECK_THROWS_AS((void)build_graph(dup, 2), DuplicateEdgeError);

    const Graph summed = build_graph(dup, 2, DuplicatePolicy::Sum);
    CHECK(summed.degrees[0] == 3.0);

    const Graph first = build_graph(dup, 2, DuplicatePolicy::KeepFirst);
    CHECK(first.degrees[0] == 1.0);
}

TEST_CASE("isolated nodes are allowed in the container") {
    const WeightedEdge one[] = {{0, 1, 1.0}};
    const Graph g = build_graph(one, 4);
    check_invariants(g);
    CHECK(g.has_isolated_node());
    CHECK(!is_connected(g));
}

TEST_CASE("random graphs satisfy the invariants") {
    Xoshiro256ss rng(31);
    for (int round = 0; round < 20; ++round) {
        const Graph g = fixtures::erdos_renyi(rng, 2 + rng.bounded(40), 0.2,
                                              /*random_weights=*/round % 2 == 1);
        check_invariants(g);
    }
}

TEST_CASE("edge list file round trip") {
    const auto dir = fixtures::fresh_temp_dir("edges");
    const auto path = dir / "edges.tsv";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "0\t1\n";          // default weight
        out << "1\t2\t0.25\n";
        out << "\n";              // blank line ignored
        out << "0\t3\t2.5\n";
    }
    const EdgeListFile f = read_edge_list(path);
    REQUIRE(f.edges.size() == 3);
    CHECK(f.min_node_count == 4);
    CHECK(f.edges[0].weight == 1.0);
    CHECK(f.edges[1].weight == 0.25);
    const Graph g = build_graph(f.edges, f.min_node_count);
    check_invariants(g);
    std::filesystem::remove_all(dir);
}

TEST_CASE("edge list parse errors carry the line number") {
    const auto dir = fixtures::fresh_temp_dir("edges_bad");
    const auto path = dir / "edges.tsv";
    {
        std::ofstream out(path);
        out << "0\t1\n";
        out << "oops\n";
    }
    CHECK_THROWS_WITH_AS((void)read_edge_list(path), doctest::Contains(":2:"), ParseError);
    CHECK_THROWS_AS((void)read_edge_list(dir / "missing.tsv"), MissingFileError);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
