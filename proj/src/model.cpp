#include "rae/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "rae/rng.hpp"

namespace rae {

RegMode parse_reg_mode(const std::string& name) {
    if (name == "in-loss" || name == "in_loss") return RegMode::InLoss;
    if (name == "decoupled") return RegMode::Decoupled;
    throw std::invalid_argument("unknown reg mode: " + name);
}

std::string reg_mode_name(RegMode mode) {
    return mode == RegMode::InLoss ? "in-loss" : "decoupled";
}

void TrainConfig::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
    if (steps < 1) throw std::invalid_argument("TrainConfig: steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(0.0 <= lr_min && lr_min <= lr_max))
        throw std::invalid_argument("TrainConfig: need 0 <= lr_min <= lr_max");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("TrainConfig: betas must lie in [0,1)");
    if (epsilon <= 0.0) throw std::invalid_argument("TrainConfig: epsilon must be > 0");
    if (latent_dim == 0) throw std::invalid_argument("TrainConfig: latent_dim must be set");
}

std::string config_to_json(const TrainConfig& c) {
    nlohmann::json j{{"lambda", c.lambda},     {"steps", c.steps},
                     {"batch_size", c.batch_size}, {"lr_max", c.lr_max},
                     {"lr_min", c.lr_min},     {"beta1", c.beta1},
                     {"beta2", c.beta2},       {"epsilon", c.epsilon},
                     {"seed", c.seed},         {"reg_mode", reg_mode_name(c.reg_mode)},
                     {"latent_dim", c.latent_dim}};
    return j.dump();
}

TrainConfig config_from_json(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    TrainConfig c;
    c.lambda = j.at("lambda").get<double>();
    c.steps = j.at("steps").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.lr_max = j.at("lr_max").get<double>();
    c.lr_min = j.at("lr_min").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.reg_mode = parse_reg_mode(j.at("reg_mode").get<std::string>());
    c.latent_dim = j.at("latent_dim").get<std::size_t>();
    return c;
}

RAEModel init_model(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m == 0 || m >= n)
        throw std::invalid_argument("init_model: need 0 < m < n, got m=" + std::to_string(m) +
                                    " n=" + std::to_string(n));
    Rng rng(seed);
    RAEModel model;
    model.input_dim = n;
    model.latent_dim = m;
    model.encoder = Matrix(m, n);
    model.decoder = Matrix(n, m);
    const double enc_scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double dec_scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (double& w : model.encoder.data()) w = rng.uniform(-enc_scale, enc_scale);
    for (double& w : model.decoder.data()) w = rng.uniform(-dec_scale, dec_scale);
    return model;
}

Matrix encode(const RAEModel& model, const Matrix& x_batch) {
    if (x_batch.cols() != model.input_dim)
        throw std::invalid_argument("encode: batch dim " + std::to_string(x_batch.cols()) +
                                    " != model input dim " + std::to_string(model.input_dim));
    return matmul(x_batch, model.encoder.transpose());
}

Matrix reconstruct(const RAEModel& model, const Matrix& x_batch) {
    return matmul(encode(model, x_batch), model.decoder.transpose());
}

LossValue loss(const RAEModel& model, const Matrix& x_batch, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("loss: lambda must be >= 0");
    const Matrix xhat = reconstruct(model, x_batch);
    double recon = 0.0;
    for (std::size_t i = 0; i < x_batch.size(); ++i) {
        const double d = xhat.data()[i] - x_batch.data()[i];
        recon += d * d;
    }
    recon /= static_cast<double>(x_batch.rows());
    const double we = model.encoder.frobenius_norm();
    const double wd = model.decoder.frobenius_norm();
    LossValue out;
    out.reconstruction = recon;
    out.regularization = lambda * (we * we + wd * wd);
    out.total = out.reconstruction + out.regularization;
    return out;
}

std::pair<Matrix, Matrix> gradients(const RAEModel& model, const Matrix& x_batch, double lambda,
                                    RegMode reg_mode) {
    const std::size_t batch = x_batch.rows();
    const Matrix z = encode(model, x_batch);            // B x m
    const Matrix xhat = matmul(z, model.decoder.transpose());  // B x n

    Matrix residual(batch, x_batch.cols());  // R = Xhat - X
    for (std::size_t i = 0; i < residual.size(); ++i)
        residual.data()[i] = xhat.data()[i] - x_batch.data()[i];

    const double scale = 2.0 / static_cast<double>(batch);
    Matrix g_decoder = matmul(residual.transpose(), z);  // n x m
    Matrix dz = matmul(residual, model.decoder);         // B x m
    Matrix g_encoder = matmul(dz.transpose(), x_batch);  // m x n
    for (double& v : g_decoder.data()) v *= scale;
    for (double& v : g_encoder.data()) v *= scale;

    if (reg_mode == RegMode::InLoss && lambda != 0.0) {
        for (std::size_t i = 0; i < g_encoder.size(); ++i)
            g_encoder.data()[i] += 2.0 * lambda * model.encoder.data()[i];
        for (std::size_t i = 0; i < g_decoder.size(); ++i)
            g_decoder.data()[i] += 2.0 * lambda * model.decoder.data()[i];
    }
    return {std::move(g_encoder), std::move(g_decoder)};
}

namespace {

constexpr char kRaeMagic[] = "RAEDR1\n";

void write_matrix_f64(std::ofstream& out, const Matrix& m) {
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix read_matrix_f64(std::ifstream& in, std::size_t rows, std::size_t cols,
                       const std::string& path) {
    std::vector<double> data(rows * cols);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != data.size() * sizeof(double))
        throw std::runtime_error("load_model: truncated weights in " + path);
    return Matrix(rows, cols, std::move(data));
}

}  // namespace

void save_model(const RAEModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out.write(kRaeMagic, sizeof(kRaeMagic) - 1);
    nlohmann::json header{{"n", model.input_dim}, {"m", model.latent_dim}};
    header["config"] = model.provenance
                           ? nlohmann::json::parse(config_to_json(*model.provenance))
                           : nlohmann::json("untrained");
    const std::string header_line = header.dump() + "\n";
    out.write(header_line.data(), static_cast<std::streamsize>(header_line.size()));
    write_matrix_f64(out, model.encoder);
    write_matrix_f64(out, model.decoder);
    if (!out) throw std::runtime_error("save_model: write failed: " + path);
}

RAEModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    char magic[sizeof(kRaeMagic) - 1];
    in.read(magic, sizeof(magic));
    if (static_cast<std::size_t>(in.gcount()) != sizeof(magic) ||
        std::string(magic, sizeof(magic)) != kRaeMagic)
        throw std::runtime_error("load_model: bad magic in " + path);
    std::string header_line;
    if (!std::getline(in, header_line))
        throw std::runtime_error("load_model: missing header in " + path);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_model: bad header in " + path + ": " + e.what());
    }
    RAEModel model;
    model.input_dim = header.at("n").get<std::size_t>();
    model.latent_dim = header.at("m").get<std::size_t>();
    if (model.latent_dim == 0 || model.latent_dim >= model.input_dim)
        throw std::runtime_error("load_model: invalid dims in " + path);
    if (header.contains("config") && header["config"].is_object())
        model.provenance = config_from_json(header["config"].dump());
    model.encoder = read_matrix_f64(in, model.latent_dim, model.input_dim, path);
    model.decoder = read_matrix_f64(in, model.input_dim, model.latent_dim, path);
    return model;
}

}  // namespace rae
