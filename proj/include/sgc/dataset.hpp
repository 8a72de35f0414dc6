#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sgc/graph.hpp"

namespace sgc {

enum class NormalizationMode { None, RowL1, Standardize };

std::string to_string(NormalizationMode mode);
NormalizationMode normalization_from_string(const std::string& name);

// A loaded transductive node-classification dataset. labels[i] == -1 marks
// an unlabeled node; masked nodes always carry a label in [0, n_classes).
struct DatasetBundle {
    Graph graph;
    DenseMatrix features;   // n x d
    std::vector<int> labels;  // length n, -1 = unlabeled
    std::size_t n_classes = 0;
    std::vector<std::size_t> train_mask;
    std::vector<std::size_t> val_mask;
    std::vector<std::size_t> test_mask;
};

// Reads a dataset directory:
//   edges.tsv     graph-core edge-list format
//   features.tsv  `node<TAB>idx:val idx:val...` (sparse) or
//                 `node<TAB>v0<TAB>v1...` (dense); detected by ':'
//   labels.tsv    `node<TAB>class`
//   split.json    {"train": [...], "val": [...], "test": [...]}
// The node count is 1 + the largest id seen across all four files; nodes
// without a feature (label) row get a zero feature row (label -1).
DatasetBundle load_dataset(const std::filesystem::path& dir);

void check_invariants(const DatasetBundle& bundle);

// RowL1: each row divided by its L1 norm (zero rows untouched).
// Standardize: per column, subtract the mean and divide by the population
// standard deviation; columns with std < 1e-12 become all zero.
DenseMatrix normalize_features(const DenseMatrix& x, NormalizationMode mode);

// Uniformly samples exactly per_class labeled nodes from each class, skipping
// nodes listed in `exclude` (typically val + test). Driven by the repo's
// fixed xoshiro256** PRNG, so a seed fully determines the subset. Throws
// InsufficientClassError naming the first class with too few eligible nodes.
std::vector<std::size_t> random_balanced_split(std::span<const int> labels,
                                               std::size_t n_classes,
                                               std::size_t per_class, std::uint64_t seed,
                                               std::span<const std::size_t> exclude = {});

}  // namespace sgc
