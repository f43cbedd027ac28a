#include "rae/optim.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace rae {

double cosine_lr(std::size_t step, std::size_t total_steps, double lr_max, double lr_min) {
    if (step >= total_steps) throw std::invalid_argument("cosine_lr: step out of range");
    if (total_steps == 1) return lr_max;
    const double phase = std::numbers::pi * static_cast<double>(step) /
                         static_cast<double>(total_steps - 1);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

void adam_update(Matrix& params, const Matrix& grads, AdamState& state, double lr, double lambda,
                 double beta1, double beta2, double epsilon, RegMode reg_mode) {
    if (params.rows() != grads.rows() || params.cols() != grads.cols())
        throw std::invalid_argument("adam_update: parameter/gradient shape mismatch");
    if (!grads.all_finite())
        throw numeric_error("adam_update: non-finite gradient entries");

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step_count));

    auto& m = state.first_moment.data();
    auto& v = state.second_moment.data();
    auto& p = params.data();
    const auto& g = grads.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
    }
    if (reg_mode == RegMode::Decoupled && lambda != 0.0) {
        const double shrink = 1.0 - lr * lambda;
        for (double& w : p) w *= shrink;
    }
}

void TrainHistory::write_csv(std::ostream& out) const {
    out << "step,lr,total,recon,reg\n";
    for (const auto& r : records)
        out << r.step << ',' << r.lr << ',' << r.total << ',' << r.reconstruction << ','
            << r.regularization << '\n';
}

std::pair<RAEModel, TrainHistory> train(const EmbeddingSet& data, const TrainConfig& config) {
    config.validate();
    const std::size_t n = data.dim();
    const std::size_t m = config.latent_dim;
    if (config.batch_size > data.count())
        throw std::invalid_argument("train: batch_size exceeds corpus size");

    RAEModel model = init_model(n, m, config.seed);
    // Distinct stream for batch order; keeps init and shuffling decoupled.
    BatchStream stream(data, config.batch_size, config.seed ^ 0x9E3779B97F4A7C15ULL);

    AdamState enc_state(m, n);
    AdamState dec_state(n, m);
    TrainHistory history;
    history.records.reserve(config.steps);

    for (std::size_t step = 0; step < config.steps; ++step) {
        const double lr = cosine_lr(step, config.steps, config.lr_max, config.lr_min);
        const Matrix batch = stream.next();
        const LossValue batch_loss = loss(model, batch, config.lambda);
        if (!std::isfinite(batch_loss.total))
            throw numeric_error("train: non-finite loss at step " + std::to_string(step));
        auto [g_enc, g_dec] = gradients(model, batch, config.lambda, config.reg_mode);
        try {
            adam_update(model.encoder, g_enc, enc_state, lr, config.lambda, config.beta1,
                        config.beta2, config.epsilon, config.reg_mode);
            adam_update(model.decoder, g_dec, dec_state, lr, config.lambda, config.beta1,
                        config.beta2, config.epsilon, config.reg_mode);
        } catch (const numeric_error& e) {
            throw numeric_error(std::string(e.what()) + " at step " + std::to_string(step));
        }
        history.records.push_back(
            {step, lr, batch_loss.total, batch_loss.reconstruction, batch_loss.regularization});
    }
    model.provenance = config;
    return {std::move(model), std::move(history)};
}

}  // namespace rae
