#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgc {

// Row-major dense matrix of 64-bit floats.
struct DenseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // n_rows * n_cols, row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols)
        : n_rows(rows), n_cols(cols), values(rows * cols, 0.0) {}

    static DenseMatrix zeros(std::size_t rows, std::size_t cols) {
        return DenseMatrix(rows, cols);
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return values[i * n_cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }

    std::span<double> row(std::size_t i) { return {values.data() + i * n_cols, n_cols}; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }

    // Column j as a copy (rows are the contiguous axis).
    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i) out[i] = (*this)(i, j);
        return out;
    }

    bool same_shape(const DenseMatrix& o) const {
        return n_rows == o.n_rows && n_cols == o.n_cols;
    }
};

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] > b.values[i] ? a.values[i] - b.values[i]
                                                   : b.values[i] - a.values[i];
        if (d > worst) worst = d;
    }
    return worst;
}

}  // namespace sgc
