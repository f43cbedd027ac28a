#pragma once

#include <cstdint>
#include <string>

namespace rae {

enum class RegMode { InLoss, Decoupled };

RegMode parse_reg_mode(const std::string& name);
std::string reg_mode_name(RegMode mode);

struct TrainConfig {
    double lambda = 0.0;
    std::size_t steps = 3000;
    std::size_t batch_size = 128;
    double lr_max = 1e-3;
    double lr_min = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    RegMode reg_mode = RegMode::Decoupled;
    std::size_t latent_dim = 0;

    // Throws std::invalid_argument on any broken invariant.
    void validate() const;
};

std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const std::string& json_text);

}  // namespace rae
