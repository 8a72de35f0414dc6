#include "sgc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "sgc/error.hpp"
#include "sgc/prng.hpp"

namespace sgc {

std::string to_string(NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::None: return "none";
        case NormalizationMode::RowL1: return "row_l1";
        case NormalizationMode::Standardize: return "standardize";
    }
    throw ValueError("unknown normalization mode");
}

NormalizationMode normalization_from_string(const std::string& name) {
    if (name == "none") return NormalizationMode::None;
    if (name == "row_l1") return NormalizationMode::RowL1;
    if (name == "standardize") return NormalizationMode::Standardize;
    throw ValueError("unknown normalization mode: " + name);
}

namespace {

struct FeatureRow {
    std::size_t node = 0;
    std::vector<std::pair<std::size_t, double>> entries;  // (column, value)
};

struct FeatureFile {
    std::vector<FeatureRow> rows;
    std::size_t n_cols = 0;
    std::size_t max_node = 0;
    bool any = false;
};

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line_no,
                       const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

FeatureFile read_features(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open " + path.string());

    FeatureFile out;
    std::unordered_set<std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    int format = 0;  // 0 undecided, 1 sparse, 2 dense
    std::size_t dense_cols = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;

        FeatureRow row;
        const char* p = line.data();
        const char* end = p + line.size();
        auto [idp, idec] = std::from_chars(p, end, row.node);
        if (idec != std::errc{}) fail(path, line_no, "expected node id");
        p = idp;
        if (!seen.insert(row.node).second)
            fail(path, line_no, "duplicate feature row for node " + std::to_string(row.node));
        out.max_node = std::max(out.max_node, row.node);
        out.any = true;

        if (p != end && *p != '\t') fail(path, line_no, "expected tab after node id");
        const std::string_view rest(p, static_cast<std::size_t>(end - p));
        if (rest.find_first_not_of(" \t") == std::string_view::npos) {
            // bare node id: a zero feature row, legal in either format
            out.rows.push_back(std::move(row));
            continue;
        }
        const bool sparse_line = rest.find(':') != std::string_view::npos;
        if (format == 0) format = sparse_line ? 1 : 2;

        if (format == 1) {
            if (!sparse_line) fail(path, line_no, "dense row in a sparse feature file");
            if (p != end) ++p;  // skip tab
            while (p < end) {
                while (p < end && (*p == ' ' || *p == '\t')) ++p;
                if (p == end) break;
                std::size_t col = 0;
                auto [cp, cec] = std::from_chars(p, end, col);
                if (cec != std::errc{} || cp == end || *cp != ':')
                    fail(path, line_no, "expected `index:value` pair");
                double value = 0.0;
                auto [vp, vec] = std::from_chars(cp + 1, end, value);
                if (vec != std::errc{}) fail(path, line_no, "bad feature value");
                if (!std::isfinite(value)) fail(path, line_no, "non-finite feature value");
                out.n_cols = std::max(out.n_cols, col + 1);
                if (value != 0.0) row.entries.emplace_back(col, value);
                p = vp;
            }
            std::sort(row.entries.begin(), row.entries.end());
            for (std::size_t k = 1; k < row.entries.size(); ++k)
                if (row.entries[k].first == row.entries[k - 1].first)
                    fail(path, line_no,
                         "duplicate column " + std::to_string(row.entries[k].first));
        } else {
            if (sparse_line) fail(path, line_no, "sparse row in a dense feature file");
            std::size_t cols = 0;
            while (p < end) {
                ++p;  // skip tab
                double value = 0.0;
                auto [vp, vec] = std::from_chars(p, end, value);
                if (vec != std::errc{}) fail(path, line_no, "bad feature value");
                if (!std::isfinite(value)) fail(path, line_no, "non-finite feature value");
                if (value != 0.0) row.entries.emplace_back(cols, value);
                ++cols;
                p = vp;
                if (p != end && *p != '\t') fail(path, line_no, "expected tab between values");
            }
            if (dense_cols == 0)
                dense_cols = cols;
            else if (cols != dense_cols)
                fail(path, line_no, "dense row has " + std::to_string(cols) +
                                        " values, expected " + std::to_string(dense_cols));
            out.n_cols = dense_cols;
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

struct LabelFile {
    std::vector<std::pair<std::size_t, int>> rows;
    std::size_t max_node = 0;
    int max_class = -1;
    bool any = false;
};

LabelFile read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open " + path.string());

    LabelFile out;
    std::unordered_set<std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const char* p = line.data();
        const char* end = p + line.size();
        std::size_t node = 0;
        auto [idp, idec] = std::from_chars(p, end, node);
        if (idec != std::errc{} || idp == end || *idp != '\t')
            fail(path, line_no, "expected `node<TAB>class`");
        int label = 0;
        auto [lp, lec] = std::from_chars(idp + 1, end, label);
        if (lec != std::errc{} || lp != end) fail(path, line_no, "bad class id");
        if (label < -1) fail(path, line_no, "class id below -1");
        if (!seen.insert(node).second)
            fail(path, line_no, "duplicate label row for node " + std::to_string(node));
        out.rows.emplace_back(node, label);
        out.max_node = std::max(out.max_node, node);
        out.max_class = std::max(out.max_class, label);
        out.any = true;
    }
    return out;
}

std::vector<std::size_t> read_mask(const nlohmann::json& j, const std::string& key,
                                   const std::filesystem::path& path) {
    if (!j.contains(key))
        throw SplitError(path.string() + ": missing key `" + key + "`");
    const auto& arr = j.at(key);
    if (!arr.is_array())
        throw SplitError(path.string() + ": `" + key + "` is not an array");
    std::vector<std::size_t> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw SplitError(path.string() + ": `" + key +
                             "` must hold non-negative integers");
        out.push_back(v.get<std::size_t>());
    }
    return out;
}

}  // namespace

DatasetBundle load_dataset(const std::filesystem::path& dir) {
    const auto edges_path = dir / "edges.tsv";
    const auto features_path = dir / "features.tsv";
    const auto labels_path = dir / "labels.tsv";
    const auto split_path = dir / "split.json";
    for (const auto& p : {edges_path, features_path, labels_path, split_path})
        if (!std::filesystem::exists(p))
            throw MissingFileError("dataset file missing: " + p.string());

    const EdgeListFile edge_file = read_edge_list(edges_path);
    const FeatureFile feature_file = read_features(features_path);
    const LabelFile label_file = read_labels(labels_path);

    std::ifstream split_in(split_path);
    nlohmann::json split_json;
    try {
        split_in >> split_json;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(split_path.string() + ": " + e.what());
    }
    if (!split_json.is_object())
        throw SplitError(split_path.string() + ": top level must be an object");
    for (const auto& [key, value] : split_json.items())
        if (key != "train" && key != "val" && key != "test")
            throw SplitError(split_path.string() + ": unexpected key `" + key + "`");

    DatasetBundle bundle;
    bundle.train_mask = read_mask(split_json, "train", split_path);
    bundle.val_mask = read_mask(split_json, "val", split_path);
    bundle.test_mask = read_mask(split_json, "test", split_path);

    // n = 1 + max id across every input file
    std::size_t n = edge_file.min_node_count;
    if (feature_file.any) n = std::max(n, feature_file.max_node + 1);
    if (label_file.any) n = std::max(n, label_file.max_node + 1);
    for (const auto* mask : {&bundle.train_mask, &bundle.val_mask, &bundle.test_mask})
        for (std::size_t i : *mask) n = std::max(n, i + 1);
    if (n == 0) throw SplitError(dir.string() + ": dataset is empty");

    bundle.graph = build_graph(edge_file.edges, n, DuplicatePolicy::Error);

    bundle.features = DenseMatrix(n, feature_file.n_cols);
    for (const FeatureRow& row : feature_file.rows)
        for (const auto& [col, value] : row.entries) bundle.features(row.node, col) = value;

    bundle.labels.assign(n, -1);
    for (const auto& [node, label] : label_file.rows) bundle.labels[node] = label;
    bundle.n_classes = static_cast<std::size_t>(std::max(label_file.max_class + 1, 0));

    check_invariants(bundle);
    return bundle;
}

void check_invariants(const DatasetBundle& bundle) {
    const std::size_t n = bundle.graph.n;
    check_invariants(bundle.graph);
    if (bundle.features.n_rows != n)
        throw ShapeError("feature row count differs from node count");
    if (bundle.labels.size() != n) throw ShapeError("label count differs from node count");
    for (double v : bundle.features.values)
        if (!std::isfinite(v)) throw ValueError("non-finite feature value");
    for (int label : bundle.labels)
        if (label < -1 || (label >= 0 && static_cast<std::size_t>(label) >= bundle.n_classes))
            throw IndexError("label outside [0, n_classes)");

    std::vector<char> member(n, 0);
    for (const auto* mask : {&bundle.train_mask, &bundle.val_mask, &bundle.test_mask}) {
        for (std::size_t i : *mask) {
            if (i >= n) throw IndexError("mask id " + std::to_string(i) + " out of range");
            if (member[i]) throw SplitError("node " + std::to_string(i) +
                                            " appears in more than one mask");
            member[i] = 1;
            if (bundle.labels[i] < 0)
                throw SplitError("masked node " + std::to_string(i) + " is unlabeled");
        }
    }
}

DenseMatrix normalize_features(const DenseMatrix& x, NormalizationMode mode) {
    for (double v : x.values)
        if (!std::isfinite(v)) throw ValueError("normalize_features: non-finite input");

    DenseMatrix out = x;
    switch (mode) {
        case NormalizationMode::None:
            break;
        case NormalizationMode::RowL1:
            for (std::size_t i = 0; i < out.n_rows; ++i) {
                auto row = out.row(i);
                double norm = 0.0;
                for (double v : row) norm += std::abs(v);
                if (norm == 0.0) continue;
                for (double& v : row) v /= norm;
            }
            break;
        case NormalizationMode::Standardize:
            for (std::size_t j = 0; j < out.n_cols; ++j) {
                double mean = 0.0;
                for (std::size_t i = 0; i < out.n_rows; ++i) mean += out(i, j);
                mean /= static_cast<double>(out.n_rows);
                double var = 0.0;
                for (std::size_t i = 0; i < out.n_rows; ++i) {
                    const double c = out(i, j) - mean;
                    var += c * c;
                }
                var /= static_cast<double>(out.n_rows);
                const double std_dev = std::sqrt(var);
                if (std_dev < 1e-12) {
                    for (std::size_t i = 0; i < out.n_rows; ++i) out(i, j) = 0.0;
                } else {
                    for (std::size_t i = 0; i < out.n_rows; ++i)
                        out(i, j) = (out(i, j) - mean) / std_dev;
                }
            }
            break;
    }
    return out;
}

std::vector<std::size_t> random_balanced_split(std::span<const int> labels,
                                               std::size_t n_classes,
                                               std::size_t per_class, std::uint64_t seed,
                                               std::span<const std::size_t> exclude) {
    std::vector<char> excluded(labels.size(), 0);
    for (std::size_t i : exclude) {
        if (i >= labels.size()) throw IndexError("exclude id out of range");
        excluded[i] = 1;
    }

    std::vector<std::vector<std::size_t>> pool(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int label = labels[i];
        if (label < 0 || excluded[i]) continue;
        if (static_cast<std::size_t>(label) >= n_classes)
            throw IndexError("label " + std::to_string(label) + " out of range");
        pool[static_cast<std::size_t>(label)].push_back(i);
    }

    Xoshiro256ss rng(seed);
    std::vector<std::size_t> subset;
    subset.reserve(n_classes * per_class);
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& candidates = pool[c];  // ascending node order by construction
        if (candidates.size() < per_class)
            throw InsufficientClassError(
                "class " + std::to_string(c) + " has " + std::to_string(candidates.size()) +
                " eligible nodes, need " + std::to_string(per_class));
        rng.partial_shuffle(std::span<std::size_t>(candidates), per_class);
        subset.insert(subset.end(), candidates.begin(),
                      candidates.begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    std::sort(subset.begin(), subset.end());
    return subset;
}

}  // namespace sgc
