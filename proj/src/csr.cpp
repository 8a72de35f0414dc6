#include "sgc/csr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "sgc/error.hpp"

namespace sgc {

SparseMatrix SparseMatrix::identity(std::size_t n) {
    SparseMatrix m(n, n);
    m.col_indices.resize(n);
    m.values.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.row_offsets[i + 1] = i + 1;
        m.col_indices[i] = i;
    }
    return m;
}

SparseMatrix csr_from_triplets(std::span<const Triplet> triplets, std::size_t n_rows,
                               std::size_t n_cols) {
    for (const Triplet& t : triplets) {
        if (t.row >= n_rows || t.col >= n_cols)
            throw IndexError("triplet (" + std::to_string(t.row) + "," +
                             std::to_string(t.col) + ") outside " + std::to_string(n_rows) +
                             "x" + std::to_string(n_cols));
        if (!std::isfinite(t.value))
            throw ValueError("non-finite value at (" + std::to_string(t.row) + "," +
                             std::to_string(t.col) + ")");
    }

    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (triplets[a].row != triplets[b].row) return triplets[a].row < triplets[b].row;
        return triplets[a].col < triplets[b].col;
    });

    SparseMatrix m(n_rows, n_cols);
    m.col_indices.reserve(triplets.size());
    m.values.reserve(triplets.size());

    std::size_t i = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        while (i < order.size() && triplets[order[i]].row == r) {
            const std::size_t c = triplets[order[i]].col;
            double sum = 0.0;
            while (i < order.size() && triplets[order[i]].row == r &&
                   triplets[order[i]].col == c) {
                sum += triplets[order[i]].value;
                ++i;
            }
            if (sum != 0.0) {
                m.col_indices.push_back(c);
                m.values.push_back(sum);
            }
        }
        m.row_offsets[r + 1] = m.values.size();
    }
    return m;
}

std::size_t thread_cap() {
    static const std::size_t cap = [] {
        if (const char* env = std::getenv("SGC_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<std::size_t>(v);
            return std::size_t{1};
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? std::size_t{1} : static_cast<std::size_t>(hw);
    }();
    return cap;
}

namespace {

void spmm_rows(const SparseMatrix& s, const DenseMatrix& x, DenseMatrix& out,
               std::size_t row_begin, std::size_t row_end) {
    const std::size_t d = x.n_cols;
    for (std::size_t r = row_begin; r < row_end; ++r) {
        double* out_row = out.values.data() + r * d;
        for (std::size_t k = s.row_offsets[r]; k < s.row_offsets[r + 1]; ++k) {
            const double a = s.values[k];
            const double* x_row = x.values.data() + s.col_indices[k] * d;
            for (std::size_t c = 0; c < d; ++c) out_row[c] += a * x_row[c];
        }
    }
}

}  // namespace

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x, std::size_t n_threads) {
    if (s.n_cols != x.n_rows)
        throw ShapeError("spmm: " + std::to_string(s.n_rows) + "x" +
                         std::to_string(s.n_cols) + " times " + std::to_string(x.n_rows) +
                         "x" + std::to_string(x.n_cols));

    DenseMatrix out(s.n_rows, x.n_cols);
    if (n_threads == 0) n_threads = thread_cap();
    // Each row is produced by exactly one worker with a fixed accumulation
    // order, so the bits do not depend on n_threads.
    const std::size_t work = s.nnz() * x.n_cols;
    if (n_threads <= 1 || s.n_rows < 64 || work < (std::size_t{1} << 18)) {
        spmm_rows(s, x, out, 0, s.n_rows);
        return out;
    }
    n_threads = std::min(n_threads, s.n_rows);
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    const std::size_t chunk = (s.n_rows + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(begin + chunk, s.n_rows);
        if (begin >= end) break;
        workers.emplace_back(
            [&s, &x, &out, begin, end] { spmm_rows(s, x, out, begin, end); });
    }
    for (auto& w : workers) w.join();
    return out;
}

SparseMatrix transpose(const SparseMatrix& m) {
    SparseMatrix t(m.n_cols, m.n_rows);
    t.col_indices.resize(m.nnz());
    t.values.resize(m.nnz());
    std::vector<std::size_t> counts(m.n_cols + 1, 0);
    for (std::size_t c : m.col_indices) ++counts[c + 1];
    for (std::size_t c = 0; c < m.n_cols; ++c) counts[c + 1] += counts[c];
    t.row_offsets.assign(counts.begin(), counts.end());
    std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
            const std::size_t pos = cursor[m.col_indices[k]]++;
            t.col_indices[pos] = r;
            t.values[pos] = m.values[k];
        }
    }
    return t;
}

double asymmetry(const SparseMatrix& m) {
    if (m.n_rows != m.n_cols) throw ShapeError("asymmetry: matrix not square");
    const SparseMatrix t = transpose(m);
    double worst = 0.0;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        std::size_t i = m.row_offsets[r], i_end = m.row_offsets[r + 1];
        std::size_t j = t.row_offsets[r], j_end = t.row_offsets[r + 1];
        while (i < i_end || j < j_end) {
            if (j >= j_end || (i < i_end && m.col_indices[i] < t.col_indices[j])) {
                worst = std::max(worst, std::abs(m.values[i]));
                ++i;
            } else if (i >= i_end || t.col_indices[j] < m.col_indices[i]) {
                worst = std::max(worst, std::abs(t.values[j]));
                ++j;
            } else {
                worst = std::max(worst, std::abs(m.values[i] - t.values[j]));
                ++i;
                ++j;
            }
        }
    }
    return worst;
}

double inf_norm(const SparseMatrix& m) {
    double worst = 0.0;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        double sum = 0.0;
        for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k)
            sum += std::abs(m.values[k]);
        worst = std::max(worst, sum);
    }
    return worst;
}

DenseMatrix to_dense(const SparseMatrix& m) {
    DenseMatrix d(m.n_rows, m.n_cols);
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k)
            d(r, m.col_indices[k]) = m.values[k];
    return d;
}

std::vector<Triplet> to_triplets(const SparseMatrix& m) {
    std::vector<Triplet> out;
    out.reserve(m.nnz());
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k)
            out.push_back({r, m.col_indices[k], m.values[k]});
    return out;
}

bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.n_rows == b.n_rows && a.n_cols == b.n_cols && a.row_offsets == b.row_offsets &&
           a.col_indices == b.col_indices && a.values == b.values;
}

}  // namespace sgc
