#pragma once

// Random graphs and a synthetic planted-community dataset shared by the unit
// and acceptance suites.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sgc/dataset.hpp"
#include "sgc/graph.hpp"
#include "sgc/prng.hpp"

namespace fixtures {

inline sgc::Graph erdos_renyi(sgc::Xoshiro256ss& rng, std::size_t n, double p,
                              bool random_weights = false) {
    std::vector<sgc::WeightedEdge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.next_double() < p) {
                const double w = random_weights ? 0.5 + 1.5 * rng.next_double() : 1.0;
                edges.push_back({i, j, w});
            }
    return sgc::build_graph(edges, n);
}

inline sgc::Graph connected_erdos_renyi(sgc::Xoshiro256ss& rng, std::size_t n, double p,
                                        bool random_weights = false) {
    for (;;) {
        sgc::Graph g = erdos_renyi(rng, n, p, random_weights);
        if (!g.has_isolated_node() && sgc::is_connected(g)) return g;
    }
}

struct SyntheticDataset {
    std::vector<sgc::WeightedEdge> edges;
    sgc::DenseMatrix features;
    std::vector<int> labels;
    std::size_t n = 0;
    std::size_t n_classes = 0;
    std::vector<std::size_t> train, val, test;
};

// Planted partition: nodes of the same class connect with p_in, across with
// p_out; features are a noisy one-hot class signal plus noise columns. With
// an isolated tail node optionally appended for the error-path tests.
inline SyntheticDataset make_planted(std::uint64_t seed, std::size_t per_class = 60,
                                     std::size_t n_classes = 4, std::size_t noise_dims = 6,
                                     bool add_isolated_node = false) {
    sgc::Xoshiro256ss rng(seed);
    SyntheticDataset ds;
    ds.n_classes = n_classes;
    ds.n = per_class * n_classes + (add_isolated_node ? 1 : 0);

    ds.labels.resize(ds.n);
    for (std::size_t i = 0; i < per_class * n_classes; ++i)
        ds.labels[i] = static_cast<int>(i / per_class);
    if (add_isolated_node) ds.labels[ds.n - 1] = 0;

    const double p_in = 0.10, p_out = 0.01;
    for (std::size_t i = 0; i < per_class * n_classes; ++i)
        for (std::size_t j = i + 1; j < per_class * n_classes; ++j) {
            const double p = ds.labels[i] == ds.labels[j] ? p_in : p_out;
            if (rng.next_double() < p) ds.edges.push_back({i, j, 1.0});
        }
    // patch stray degree-0 nodes so un-augmented kinds stay usable
    {
        std::vector<int> degree(ds.n, 0);
        for (const auto& e : ds.edges) {
            ++degree[e.u];
            ++degree[e.v];
        }
        for (std::size_t i = 0; i < per_class * n_classes; ++i)
            if (degree[i] == 0) {
                std::size_t partner =
                    (ds.labels[i] * per_class) + rng.bounded(per_class);
                if (partner == i) partner = (i + 1 < per_class * n_classes) ? i + 1 : i - 1;
                ds.edges.push_back({i, partner, 1.0});
            }
    }

    const std::size_t d = n_classes + noise_dims;
    ds.features = sgc::DenseMatrix(ds.n, d);
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = 0.3 * rng.next_double();
        ds.features(i, static_cast<std::size_t>(ds.labels[i])) += 1.0;
    }

    // disjoint per-class splits scaled to the class size
    const std::size_t n_train = std::max<std::size_t>(1, per_class / 6);
    const std::size_t n_val = std::max<std::size_t>(1, per_class / 4);
    const std::size_t n_test = std::max<std::size_t>(1, per_class / 4);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> ids(per_class);
        for (std::size_t i = 0; i < per_class; ++i) ids[i] = c * per_class + i;
        rng.shuffle(std::span<std::size_t>(ids));
        std::size_t next = 0;
        for (std::size_t i = 0; i < n_train; ++i) ds.train.push_back(ids[next++]);
        for (std::size_t i = 0; i < n_val; ++i) ds.val.push_back(ids[next++]);
        for (std::size_t i = 0; i < n_test; ++i) ds.test.push_back(ids[next++]);
    }
    return ds;
}

inline void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir,
                          bool sparse_features = true) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "edges.tsv");
        out << "# synthetic planted-community graph\n";
        for (const auto& e : ds.edges) out << e.u << '\t' << e.v << '\t' << e.weight << '\n';
    }
    {
        std::ofstream out(dir / "features.tsv");
        out.precision(17);
        for (std::size_t i = 0; i < ds.n; ++i) {
            out << i;
            if (sparse_features) {
                out << '\t';
                bool first = true;
                for (std::size_t j = 0; j < ds.features.n_cols; ++j) {
                    if (ds.features(i, j) == 0.0) continue;
                    if (!first) out << ' ';
                    out << j << ':' << ds.features(i, j);
                    first = false;
                }
            } else {
                for (std::size_t j = 0; j < ds.features.n_cols; ++j)
                    out << '\t' << ds.features(i, j);
            }
            out << '\n';
        }
    }
    {
        std::ofstream out(dir / "labels.tsv");
        for (std::size_t i = 0; i < ds.n; ++i) out << i << '\t' << ds.labels[i] << '\n';
    }
    {
        std::ofstream out(dir / "split.json");
        auto dump = [&out](const char* key, const std::vector<std::size_t>& ids) {
            out << '"' << key << "\": [";
            for (std::size_t i = 0; i < ids.size(); ++i)
                out << (i ? "," : "") << ids[i];
            out << ']';
        };
        out << "{";
        dump("train", ds.train);
        out << ", ";
        dump("val", ds.val);
        out << ", ";
        dump("test", ds.test);
        out << "}\n";
    }
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("sgc_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures
