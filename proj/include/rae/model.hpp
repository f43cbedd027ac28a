#pragma once

#include <optional>
#include <string>
#include <utility>

#include "rae/matrix.hpp"
#include "rae/train_config.hpp"

namespace rae {

// Linear autoencoder without bias terms. The trained encoder is the
// dimensionality reduction map.
struct RAEModel {
    Matrix encoder;  // m x n
    Matrix decoder;  // n x m
    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
    std::optional<TrainConfig> provenance;  // empty while untrained
};

// Uniform init in [-1/sqrt(n), 1/sqrt(n)] (encoder) and [-1/sqrt(m), 1/sqrt(m)]
// (decoder), from the contract PRNG; requires 0 < m < n.
RAEModel init_model(std::size_t n, std::size_t m, std::uint64_t seed);

// Rows of the batch map through the encoder: Z = X * We^T.
Matrix encode(const RAEModel& model, const Matrix& x_batch);

// Xhat = encode(X) * Wd^T.
Matrix reconstruct(const RAEModel& model, const Matrix& x_batch);

struct LossValue {
    double total = 0.0;
    double reconstruction = 0.0;  // mean over batch rows of squared l2 error
    double regularization = 0.0;  // lambda * (||We||_F^2 + ||Wd||_F^2)
};

LossValue loss(const RAEModel& model, const Matrix& x_batch, double lambda);

// Analytic gradients of the batch-mean loss. With R = Xhat - X:
//   G_d = (2/B) R^T (X We^T),   G_e = (2/B) Wd^T R^T X.
// InLoss additionally adds 2*lambda*W to each; Decoupled leaves the decay to
// the optimizer.
std::pair<Matrix, Matrix> gradients(const RAEModel& model, const Matrix& x_batch, double lambda,
                                    RegMode reg_mode);

// File format: ASCII magic "RAEDR1\n", one JSON header line, then encoder and
// decoder as LE f64 row-major arrays.
void save_model(const RAEModel& model, const std::string& path);
RAEModel load_model(const std::string& path);

}  // namespace rae
