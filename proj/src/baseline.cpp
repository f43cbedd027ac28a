#include "rae/baseline.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace rae {

PCAModel pca_fit(const EmbeddingSet& data, std::size_t m) {
    const std::size_t n = data.dim();
    const std::size_t count = data.count();
    if (m == 0 || m > n) throw std::invalid_argument("pca_fit: need 0 < m <= n");
    if (count < 2) throw std::invalid_argument("pca_fit: need at least 2 samples");

    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < n; ++j) mean[j] += data.vectors(i, j);
    for (double& v : mean) v /= static_cast<double>(count);

    Matrix centered(count, n);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < n; ++j) centered(i, j) = data.vectors(i, j) - mean[j];

    Matrix cov(n, n);
    const double divisor = static_cast<double>(count - 1);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            double sum = 0.0;
            for (std::size_t i = 0; i < count; ++i) sum += centered(i, a) * centered(i, b);
            cov(a, b) = sum / divisor;
            cov(b, a) = cov(a, b);
        }

    const EigenDecomposition eig = sym_eigen(cov);

    PCAModel model;
    model.mean = std::move(mean);
    model.components = Matrix(m, n);
    model.eigenvalues.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        model.eigenvalues[r] = std::max(eig.eigenvalues[r], 0.0);
        // sign convention: largest-magnitude entry positive
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double mag = std::abs(eig.eigenvectors(j, r));
            if (mag > best) {
                best = mag;
                arg = j;
            }
        }
        const double sign = eig.eigenvectors(arg, r) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j)
            model.components(r, j) = sign * eig.eigenvectors(j, r);
    }
    return model;
}

EmbeddingSet pca_transform(const PCAModel& model, const EmbeddingSet& data) {
    const std::size_t n = model.mean.size();
    if (data.dim() != n) throw std::invalid_argument("pca_transform: dimension mismatch");
    Matrix centered(data.count(), n);
    for (std::size_t i = 0; i < data.count(); ++i)
        for (std::size_t j = 0; j < n; ++j)
            centered(i, j) = data.vectors(i, j) - model.mean[j];
    return EmbeddingSet{matmul(centered, model.components.transpose()), data.source + ":pca"};
}

EmbeddingSet pca_inverse_transform(const PCAModel& model, const EmbeddingSet& reduced) {
    if (reduced.dim() != model.components.rows())
        throw std::invalid_argument("pca_inverse_transform: dimension mismatch");
    Matrix back = matmul(reduced.vectors, model.components);
    for (std::size_t i = 0; i < back.rows(); ++i)
        for (std::size_t j = 0; j < back.cols(); ++j) back(i, j) += model.mean[j];
    return EmbeddingSet{std::move(back), reduced.source + ":inverse"};
}

namespace {
constexpr char kPcaMagic[] = "PCADR1\n";
}

void save_pca(const PCAModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_pca: cannot open " + path);
    out.write(kPcaMagic, sizeof(kPcaMagic) - 1);
    nlohmann::json header{{"n", model.mean.size()}, {"m", model.components.rows()}};
    const std::string line = header.dump() + "\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    auto write_f64 = [&](const double* p, std::size_t count) {
        out.write(reinterpret_cast<const char*>(p),
                  static_cast<std::streamsize>(count * sizeof(double)));
    };
    write_f64(model.mean.data(), model.mean.size());
    write_f64(model.components.data().data(), model.components.size());
    write_f64(model.eigenvalues.data(), model.eigenvalues.size());
    if (!out) throw std::runtime_error("save_pca: write failed: " + path);
}

PCAModel load_pca(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_pca: cannot open " + path);
    char magic[sizeof(kPcaMagic) - 1];
    in.read(magic, sizeof(magic));
    if (static_cast<std::size_t>(in.gcount()) != sizeof(magic) ||
        std::string(magic, sizeof(magic)) != kPcaMagic)
        throw std::runtime_error("load_pca: bad magic in " + path);
    std::string header_line;
    if (!std::getline(in, header_line))
        throw std::runtime_error("load_pca: missing header in " + path);
    const nlohmann::json header = nlohmann::json::parse(header_line);
    const auto n = header.at("n").get<std::size_t>();
    const auto m = header.at("m").get<std::size_t>();
    if (n == 0 || m == 0 || m > n) throw std::runtime_error("load_pca: invalid dims in " + path);

    auto read_f64 = [&](double* p, std::size_t count) {
        in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
        if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
            throw std::runtime_error("load_pca: truncated data in " + path);
    };
    PCAModel model;
    model.mean.resize(n);
    read_f64(model.mean.data(), n);
    std::vector<double> comp(m * n);
    read_f64(comp.data(), comp.size());
    model.components = Matrix(m, n, std::move(comp));
    model.eigenvalues.resize(m);
    read_f64(model.eigenvalues.data(), m);
    return model;
}

}  // namespace rae
