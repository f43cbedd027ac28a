#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rae {

// Dense row-major matrix of doubles. The data-taking constructor rejects
// non-finite entries; element mutation afterwards is the caller's business.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Matrix transpose() const;
    double frobenius_norm() const;
    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Product a*b. Parallelizes over output rows when worthwhile; the per-cell
// summation order is fixed, so results are identical for any thread count.
Matrix matmul(const Matrix& a, const Matrix& b);

// W * W^T, the m x m Gram form used for spectrum extraction.
Matrix gram(const Matrix& w);

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // column j pairs with eigenvalues[j]
};

// Cyclic Jacobi. Input must be square and symmetric; throws on asymmetry or
// if the off-diagonal mass has not dropped below 1e-12 * ||m||_F after
// max_sweeps sweeps.
EigenDecomposition sym_eigen(const Matrix& m, int max_sweeps = 100);

// Singular values of w, descending, via the smaller Gram matrix. Eigenvalues
// slightly negative from round-off are clamped to zero; anything more
// negative signals a broken Gram computation and throws.
std::vector<double> singular_values(const Matrix& w);

// Worker cap for matmul: min(RAE_THREADS, hardware concurrency).
std::size_t worker_thread_cap();

}  // namespace rae
