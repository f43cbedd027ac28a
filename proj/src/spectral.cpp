#include "rae/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "rae/rng.hpp"

namespace rae {

namespace {

void require_symmetric(const Matrix& m, const char* who) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(who) + ": not square");
    double max_abs = 0.0;
    for (double v : m.data()) max_abs = std::max(max_abs, std::abs(v));
    const double tol = 1e-9 * std::max(1.0, max_abs);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol)
                throw std::invalid_argument(std::string(who) + ": not symmetric");
}

// Gaussian vector of unit-ish norm via the contract PRNG; per-trial seeding
// keeps trials independent of evaluation order.
std::vector<double> gaussian_vector(std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& v : x) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
    } while (norm < 1e-6);
    return x;
}

}  // namespace

double rayleigh(const Matrix& m, std::span<const double> x) {
    require_symmetric(m, "rayleigh");
    if (x.size() != m.rows()) throw std::invalid_argument("rayleigh: dimension mismatch");
    double xtx = 0.0;
    for (double v : x) xtx += v * v;
    if (xtx == 0.0) throw std::invalid_argument("rayleigh: zero vector");
    double xtmx = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) row += m(i, j) * x[j];
        xtmx += x[i] * row;
    }
    return xtmx / xtx;
}

std::string BoundCheckResult::to_json() const {
    nlohmann::json j{{"trials", trials}, {"violations", violations}, {"worst_margin", worst_margin}};
    return j.dump();
}

BoundCheckResult verify_rayleigh_bounds(const Matrix& m, std::size_t trials, std::uint64_t seed) {
    require_symmetric(m, "verify_rayleigh_bounds");
    const EigenDecomposition eig = sym_eigen(m);
    const double lambda_max = eig.eigenvalues.front();
    const double lambda_min = eig.eigenvalues.back();
    const double tol = 1e-9 * (1.0 + std::abs(lambda_max));

    BoundCheckResult result;
    result.trials = trials;
    result.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        const std::vector<double> x = gaussian_vector(m.rows(), seed + t);
        const double r = rayleigh(m, x);
        const double slack = std::min(r - lambda_min, lambda_max - r);
        result.worst_margin = std::min(result.worst_margin, slack);
        if (slack < -tol) ++result.violations;
    }
    return result;
}

std::string SpectrumReport::to_json() const {
    nlohmann::json j{{"sigma_max", sigma_max},
                     {"sigma_min", sigma_min},
                     {"spectrum", spectrum},
                     {"frobenius_norm", frobenius_norm}};
    if (std::isinf(condition_number))
        j["condition_number"] = nullptr;
    else
        j["condition_number"] = condition_number;
    return j.dump();
}

SpectrumReport spectrum_report(const Matrix& w) {
    SpectrumReport report;
    report.spectrum = singular_values(w);
    report.sigma_max = report.spectrum.front();
    report.sigma_min = report.spectrum.back();
    report.frobenius_norm = w.frobenius_norm();
    if (report.sigma_min < 1e-12 * report.sigma_max || report.sigma_min == 0.0)
        report.condition_number = std::numeric_limits<double>::infinity();
    else
        report.condition_number = report.sigma_max / report.sigma_min;
    return report;
}

BoundCheckResult verify_norm_bounds(const Matrix& w, std::size_t trials, std::uint64_t seed) {
    const Matrix gram_full = gram(w.transpose());  // W^T W, n x n
    const EigenDecomposition eig = sym_eigen(gram_full);
    const double sigma_hi = std::sqrt(std::max(eig.eigenvalues.front(), 0.0));
    const double sigma_lo = std::sqrt(std::max(eig.eigenvalues.back(), 0.0));

    BoundCheckResult result;
    result.trials = trials;
    result.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        const std::vector<double> x = gaussian_vector(w.cols(), seed + t);
        double x_norm_sq = 0.0;
        for (double v : x) x_norm_sq += v * v;
        const double x_norm = std::sqrt(x_norm_sq);

        double wx_norm_sq = 0.0;
        for (std::size_t i = 0; i < w.rows(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < w.cols(); ++j) row += w(i, j) * x[j];
            wx_norm_sq += row * row;
        }
        const double wx_norm = std::sqrt(wx_norm_sq);

        const double tol = 1e-9 * sigma_hi * x_norm;
        const double slack =
            std::min(wx_norm - sigma_lo * x_norm, sigma_hi * x_norm - wx_norm);
        bool violated = slack < -tol;

        // ||Wx||^2 = ||x||^2 * R(W^T W, x)
        const double via_rayleigh = x_norm_sq * rayleigh(gram_full, x);
        const double identity_err = std::abs(wx_norm_sq - via_rayleigh);
        if (identity_err > 1e-9 * std::max(1.0, std::abs(wx_norm_sq))) violated = true;

        result.worst_margin = std::min(result.worst_margin, slack);
        if (violated) ++result.violations;
    }
    return result;
}

}  // namespace rae
