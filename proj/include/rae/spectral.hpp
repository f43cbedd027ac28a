#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rae/matrix.hpp"

namespace rae {

// x^T M x / x^T x for symmetric M.
double rayleigh(const Matrix& m, std::span<const double> x);

struct BoundCheckResult {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;  // most negative slack observed

    std::string to_json() const;
};

// Samples `trials` Gaussian vectors (per-trial seed = seed + index) and checks
// lambda_min - tol <= R(m, x) <= lambda_max + tol with tol = 1e-9*(1+|lambda_max|).
BoundCheckResult verify_rayleigh_bounds(const Matrix& m, std::size_t trials, std::uint64_t seed);

struct SpectrumReport {
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double condition_number = 0.0;  // +inf when sigma_min < 1e-12 * sigma_max
    std::vector<double> spectrum;   // descending
    double frobenius_norm = 0.0;

    std::string to_json() const;  // infinite condition_number serializes as null
};

SpectrumReport spectrum_report(const Matrix& w);

// Checks sigma_lo*||x|| - tol <= ||Wx|| <= sigma_hi*||x|| + tol for random x,
// plus the identity ||Wx||^2 == ||x||^2 * R(W^T W, x) to relative 1e-9.
// The bounds come from the full spectrum of the n x n Gram W^T W, so sigma_lo
// is 0 when m < n (W then has a nontrivial kernel in its domain).
BoundCheckResult verify_norm_bounds(const Matrix& w, std::size_t trials, std::uint64_t seed);

}  // namespace rae
