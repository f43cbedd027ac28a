#pragma once

#include <string>
#include <vector>

#include "rae/data.hpp"
#include "rae/matrix.hpp"

namespace rae {

struct PCAModel {
    std::vector<double> mean;  // length n
    Matrix components;         // m x n, rows are principal directions
    std::vector<double> eigenvalues;  // length m, descending
};

// Mean-centered covariance (divisor N-1) eigendecomposition; keeps the top m
// pairs. Sign of each component is fixed so its largest-magnitude entry is
// positive. m == n is allowed (full orthogonal change of basis).
PCAModel pca_fit(const EmbeddingSet& data, std::size_t m);

// Rows are components * (x - mean).
EmbeddingSet pca_transform(const PCAModel& model, const EmbeddingSet& data);

// Back-projection to the original space: mean + y * components.
EmbeddingSet pca_inverse_transform(const PCAModel& model, const EmbeddingSet& reduced);

// Same container format as RAE models, magic "PCADR1\n".
void save_pca(const PCAModel& model, const std::string& path);
PCAModel load_pca(const std::string& path);

}  // namespace rae
