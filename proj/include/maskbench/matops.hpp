#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace maskbench {

// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Worker count used by parallel loops; 0 means hardware concurrency.
// Results never depend on this value, only wall time does.
void set_worker_count(int jobs);
int worker_count();

// Runs fn(begin, end) over a partition of [0, total). Each index is handled
// by exactly one invocation, so per-index work must be self-contained for
// the output to be scheduling-independent.
void parallel_chunks(std::size_t total,
                     const std::function<void(std::size_t, std::size_t)>& fn);

// Fixed-order dot product (4 independent accumulators, combined in a fixed
// sequence; bit-reproducible for a given build).
double dot(const double* a, const double* b, std::size_t n);

// scores[i][c] = dot(X[i], W[c]) + bias[c].  X: n x d, W: C x d.
void linear_scores(const Matrix& x, const Matrix& w, const std::vector<double>& bias,
                   Matrix& scores);

// grad[j][c] = sum_i coeff[i][c] * X[i][j], written as a d x C matrix.
// xt is the d x n transpose of X. Parallel over j; each output row is
// accumulated sequentially over i, so results are scheduling-independent.
void feature_weighted_sums(const Matrix& xt, const Matrix& coeff, Matrix& grad);

Matrix transpose(const Matrix& x);

// Compressed-sparse-rows view of a feature matrix. LBP histograms are mostly
// empty bins, so the training loops run an order of magnitude faster on this
// representation; results stay deterministic because every output element is
// still accumulated in fixed (ascending index) order.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_begin;  // rows + 1 offsets
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    static CsrMatrix from_dense(const Matrix& x);
};

// Sparse counterpart of linear_scores: scores[i][c] = dot(X[i], W[c]) + bias[c]
// with W given as C x d; internally iterates row nonzeros against W columns.
void csr_linear_scores(const CsrMatrix& x, const Matrix& w,
                       const std::vector<double>& bias, Matrix& scores);

// Sparse counterpart of feature_weighted_sums; x_csc is the CSC form of X,
// i.e. CsrMatrix::from_dense(transpose(X)).
void csc_feature_weighted_sums(const CsrMatrix& x_csc, const Matrix& coeff,
                               Matrix& grad);

}  // namespace maskbench
