#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sgc/dense.hpp"

namespace sgc {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

// Compressed sparse row matrix, 64-bit values. Canonical form: row_offsets
// non-decreasing with row_offsets[0] == 0, columns strictly increasing within
// each row, no explicitly stored zeros.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_offsets;  // n_rows + 1
    std::vector<std::size_t> col_indices;
    std::vector<double> values;

    SparseMatrix() : row_offsets(1, 0) {}
    SparseMatrix(std::size_t rows, std::size_t cols)
        : n_rows(rows), n_cols(cols), row_offsets(rows + 1, 0) {}

    std::size_t nnz() const { return values.size(); }

    static SparseMatrix identity(std::size_t n);
};

// Builds canonical CSR from (row, col, value) triplets. Duplicates at the
// same coordinate are summed; entries that end up exactly zero are dropped.
// Throws IndexError for out-of-range indices, ValueError for non-finite
// values.
SparseMatrix csr_from_triplets(std::span<const Triplet> triplets, std::size_t n_rows,
                               std::size_t n_cols);

// Sparse-dense product S * X. Per output row, stored entries are accumulated
// in CSR order, so the result is bitwise independent of the thread count.
// n_threads == 0 picks the global worker cap (see thread_cap()).
// Throws ShapeError when S.n_cols != X.n_rows.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x, std::size_t n_threads = 0);

SparseMatrix transpose(const SparseMatrix& m);

// max |a_ij - a_ji|; 0 for an exactly symmetric matrix.
double asymmetry(const SparseMatrix& m);

// Infinity norm (max absolute row sum).
double inf_norm(const SparseMatrix& m);

DenseMatrix to_dense(const SparseMatrix& m);

std::vector<Triplet> to_triplets(const SparseMatrix& m);

bool operator==(const SparseMatrix& a, const SparseMatrix& b);

// Worker cap for row-parallel kernels and experiment cells: the SGC_THREADS
// environment variable when set (minimum 1), otherwise the hardware
// concurrency.
std::size_t thread_cap();

}  // namespace sgc
