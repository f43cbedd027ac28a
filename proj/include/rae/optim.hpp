#pragma once

#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rae/data.hpp"
#include "rae/model.hpp"
#include "rae/train_config.hpp"

namespace rae {

// Training aborted on a non-finite loss or gradient. Surfaced as its own
// type so the CLI can map it to exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// lr_min + 0.5*(lr_max-lr_min)*(1 + cos(pi*step/(total_steps-1))), per-step.
double cosine_lr(std::size_t step, std::size_t total_steps, double lr_max, double lr_min);

struct AdamState {
    Matrix first_moment;
    Matrix second_moment;
    std::size_t step_count = 0;

    explicit AdamState(std::size_t rows, std::size_t cols)
        : first_moment(rows, cols), second_moment(rows, cols) {}
};

// Standard Adam with bias correction. Decoupled mode shrinks the parameters
// by lr*lambda after the Adam step, outside the moment accumulators.
void adam_update(Matrix& params, const Matrix& grads, AdamState& state, double lr, double lambda,
                 double beta1, double beta2, double epsilon, RegMode reg_mode);

struct TrainHistory {
    struct Record {
        std::size_t step;
        double lr;
        double total;
        double reconstruction;
        double regularization;
    };
    std::vector<Record> records;

    void write_csv(std::ostream& out) const;  // header: step,lr,total,recon,reg
};

// The full recipe: init, then steps iterations of batch / gradients /
// cosine_lr / adam_update. Deterministic in (data, config).
std::pair<RAEModel, TrainHistory> train(const EmbeddingSet& data, const TrainConfig& config);

}  // namespace rae
