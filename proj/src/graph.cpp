#include "sgc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <unordered_map>

#include "sgc/error.hpp"

namespace sgc {

double Graph::max_degree() const {
    double m = 0.0;
    for (double d : degrees) m = std::max(m, d);
    return m;
}

double Graph::min_degree() const {
    if (degrees.empty()) return 0.0;
    double m = degrees[0];
    for (double d : degrees) m = std::min(m, d);
    return m;
}

bool Graph::has_isolated_node() const {
    for (double d : degrees)
        if (d == 0.0) return true;
    return false;
}

Graph build_graph(std::span<const WeightedEdge> edges, std::size_t n,
                  DuplicatePolicy policy) {
    std::unordered_map<std::uint64_t, double> weight_by_pair;
    weight_by_pair.reserve(edges.size() * 2);

    for (const WeightedEdge& e : edges) {
        if (e.u >= n || e.v >= n)
            throw IndexError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ") outside graph of " + std::to_string(n) + " nodes");
        if (e.u == e.v)
            throw SelfLoopError("self-loop at node " + std::to_string(e.u));
        if (!std::isfinite(e.weight) || e.weight <= 0.0)
            throw ValueError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ") has non-positive weight");
        const std::size_t a = std::min(e.u, e.v), b = std::max(e.u, e.v);
        const std::uint64_t key =
            (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
        auto [it, inserted] = weight_by_pair.try_emplace(key, e.weight);
        if (!inserted) {
            switch (policy) {
                case DuplicatePolicy::Error:
                    throw DuplicateEdgeError("duplicate edge (" + std::to_string(a) + "," +
                                             std::to_string(b) + ")");
                case DuplicatePolicy::Sum:
                    it->second += e.weight;
                    break;
                case DuplicatePolicy::KeepFirst:
                    break;
            }
        }
    }

    std::vector<Triplet> triplets;
    triplets.reserve(weight_by_pair.size() * 2);
    for (const auto& [key, w] : weight_by_pair) {
        const auto a = static_cast<std::size_t>(key >> 32);
        const auto b = static_cast<std::size_t>(key & 0xFFFFFFFFULL);
        triplets.push_back({a, b, w});
        triplets.push_back({b, a, w});
    }

    Graph g;
    g.n = n;
    g.adjacency = csr_from_triplets(triplets, n, n);
    g.degrees.assign(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = g.adjacency.row_offsets[r]; k < g.adjacency.row_offsets[r + 1];
             ++k)
            g.degrees[r] += g.adjacency.values[k];
    return g;
}

void check_invariants(const Graph& g) {
    const SparseMatrix& a = g.adjacency;
    if (a.n_rows != g.n || a.n_cols != g.n)
        throw ShapeError("graph adjacency shape mismatch");
    if (g.degrees.size() != g.n) throw ShapeError("degrees length mismatch");
    if (a.row_offsets.size() != g.n + 1 || a.row_offsets.front() != 0 ||
        a.row_offsets.back() != a.nnz())
        throw ValueError("adjacency row_offsets not canonical");
    for (std::size_t r = 0; r < g.n; ++r) {
        if (a.row_offsets[r] > a.row_offsets[r + 1])
            throw ValueError("adjacency row_offsets decreasing");
        double row_sum = 0.0;
        for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
            if (k > a.row_offsets[r] && a.col_indices[k] <= a.col_indices[k - 1])
                throw ValueError("adjacency columns not strictly increasing");
            if (a.col_indices[k] >= g.n) throw IndexError("adjacency column out of range");
            if (a.col_indices[k] == r) throw SelfLoopError("nonzero diagonal in adjacency");
            if (a.values[k] <= 0.0 || !std::isfinite(a.values[k]))
                throw ValueError("non-positive adjacency weight");
            row_sum += a.values[k];
        }
        if (g.degrees[r] != row_sum) throw ValueError("degree differs from row sum");
    }
    if (asymmetry(a) != 0.0) throw AsymmetricError("adjacency not symmetric");
}

namespace {

const char* parse_size(const char* begin, const char* end, std::size_t& out) {
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{}) return nullptr;
    return ptr;
}

const char* parse_double(const char* begin, const char* end, double& out) {
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{}) return nullptr;
    return ptr;
}

}  // namespace

EdgeListFile read_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open " + path.string());

    EdgeListFile out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t max_id = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const char* p = line.data();
        const char* end = line.data() + line.size();

        WeightedEdge e;
        p = parse_size(p, end, e.u);
        if (!p || p == end || *p != '\t')
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected `u<TAB>v[<TAB>weight]`");
        p = parse_size(p + 1, end, e.v);
        if (!p)
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected `u<TAB>v[<TAB>weight]`");
        if (p != end) {
            if (*p != '\t')
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": trailing characters after node ids");
            p = parse_double(p + 1, end, e.weight);
            if (!p || p != end)
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": bad weight field");
        }
        max_id = std::max({max_id, e.u, e.v});
        any = true;
        out.edges.push_back(e);
    }
    out.min_node_count = any ? max_id + 1 : 0;
    return out;
}

bool is_connected(const Graph& g) {
    if (g.n == 0) return true;
    std::vector<char> seen(g.n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t visited = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t k = g.adjacency.row_offsets[u]; k < g.adjacency.row_offsets[u + 1];
             ++k) {
            const std::size_t v = g.adjacency.col_indices[k];
            if (!seen[v]) {
                seen[v] = 1;
                ++visited;
                stack.push_back(v);
            }
        }
    }
    return visited == g.n;
}

}  // namespace sgc
