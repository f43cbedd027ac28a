#include "rae/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace rae {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: dimensions must be positive");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: dimensions must be positive");
    if (data_.size() != rows * cols)
        throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    for (double v : data_)
        if (!std::isfinite(v)) throw std::invalid_argument("Matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::frobenius_norm() const {
    double sum = 0.0;
    for (double v : data_) sum += v * v;
    return std::sqrt(sum);
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t worker_thread_cap() {
    std::size_t cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("RAE_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed >= 1 && static_cast<std::size_t>(parsed) < cap)
            cap = static_cast<std::size_t>(parsed);
    }
    return cap;
}

namespace {

// ikj loop: per output cell the k-sum runs in ascending order, matching the
// sequential result bitwise.
void matmul_rows(const Matrix& a, const Matrix& b, Matrix& c, std::size_t row_begin,
                 std::size_t row_end) {
    const std::size_t n = a.cols();
    const std::size_t p = b.cols();
    for (std::size_t i = row_begin; i < row_end; ++i) {
        double* ci = c.row(i).data();
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            const double* bk = b.row(k).data();
            for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
        }
    }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + ")");
    Matrix c(a.rows(), b.cols());
    const std::size_t flops = a.rows() * a.cols() * b.cols();
    std::size_t workers = worker_thread_cap();
    if (flops < (1u << 18) || workers <= 1 || a.rows() < 2 * workers) {
        matmul_rows(a, b, c, 0, a.rows());
        return c;
    }
    workers = std::min(workers, a.rows());
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (a.rows() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(begin + chunk, a.rows());
        if (begin >= end) break;
        threads.emplace_back(matmul_rows, std::cref(a), std::cref(b), std::ref(c), begin, end);
    }
    for (auto& t : threads) t.join();
    return c;
}

Matrix gram(const Matrix& w) {
    const std::size_t m = w.rows();
    const std::size_t n = w.cols();
    Matrix g(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) sum += w(i, k) * w(j, k);
            g(i, j) = sum;
            g(j, i) = sum;
        }
    }
    return g;
}

EigenDecomposition sym_eigen(const Matrix& m, int max_sweeps) {
    const std::size_t n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("sym_eigen: matrix is not square");

    double max_abs = 0.0;
    for (double v : m.data()) max_abs = std::max(max_abs, std::abs(v));
    const double sym_tol = 1e-9 * std::max(1.0, max_abs);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > sym_tol)
                throw std::invalid_argument("sym_eigen: matrix is not symmetric");

    Matrix a = m;
    // Symmetrize exactly so the rotations see a(i,j) == a(j,i).
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = avg;
            a(j, i) = avg;
        }

    Matrix v = Matrix::identity(n);
    const double fro = m.frobenius_norm();
    const double target = 1e-12 * fro;

    auto off_diag = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) sum += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(sum);
    };

    bool converged = fro == 0.0 || off_diag() <= target;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p);
                        const double arq = a(r, q);
                        a(r, p) = arp - s * (arq + tau * arp);
                        a(p, r) = a(r, p);
                        a(r, q) = arq + s * (arp - tau * arq);
                        a(q, r) = a(r, q);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        converged = off_diag() <= target;
    }
    if (!converged)
        throw std::runtime_error("sym_eigen: no convergence after " + std::to_string(max_sweeps) +
                                 " sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    }
    return out;
}

std::vector<double> singular_values(const Matrix& w) {
    const Matrix g = (w.rows() <= w.cols()) ? gram(w) : gram(w.transpose());
    EigenDecomposition eig = sym_eigen(g);

    const double lambda_max = eig.eigenvalues.empty() ? 0.0 : std::max(eig.eigenvalues.front(), 0.0);
    const double clamp_floor = -1e-10 * std::max(1.0, lambda_max);
    std::vector<double> sigma(eig.eigenvalues.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        double lambda = eig.eigenvalues[i];
        if (lambda < clamp_floor)
            throw std::runtime_error("singular_values: Gram eigenvalue " + std::to_string(lambda) +
                                     " is negative beyond round-off");
        if (lambda < 0.0) lambda = 0.0;
        sigma[i] = std::sqrt(lambda);
    }
    return sigma;  // descending, inherited from sym_eigen
}

}  // namespace rae
