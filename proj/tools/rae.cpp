#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rae/baseline.hpp"
#include "rae/data.hpp"
#include "rae/metrics.hpp"
#include "rae/model.hpp"
#include "rae/optim.hpp"
#include "rae/spectral.hpp"

namespace {

constexpr const char* kVersion = "rae 0.1.0";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001B3ULL;
        }
    }
    return hash;
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> ks;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) ks.push_back(std::stoul(item));
    if (ks.empty()) throw CLI::ValidationError("--k", "empty k list");
    return ks;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) grid.push_back(std::stod(item));
    if (grid.empty()) throw CLI::ValidationError("--grid", "empty lambda grid");
    return grid;
}

struct CommonFlags {
    std::string input;
    std::string format = "fvecs";
    double split = 0.9;
    std::uint64_t seed = 0;
};

struct TrainFlags {
    std::size_t m = 0;
    double lambda = 0.0;
    std::size_t steps = 3000;
    std::size_t batch = 128;
    double lr_max = 1e-3;
    double lr_min = 1e-5;
    std::string reg_mode = "decoupled";
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--input", flags.input, "embedding corpus file")->required();
    cmd->add_option("--format", flags.format, "fvecs|csv|rawf32");
    cmd->add_option("--split", flags.split, "train fraction");
    cmd->add_option("--seed", flags.seed, "PRNG seed");
}

void add_train(CLI::App* cmd, TrainFlags& flags, bool require_m = true) {
    auto* m_opt = cmd->add_option("--m", flags.m, "latent dimension");
    if (require_m) m_opt->required();
    cmd->add_option("--lambda", flags.lambda, "regularization coefficient");
    cmd->add_option("--steps", flags.steps, "update steps");
    cmd->add_option("--batch", flags.batch, "batch size");
    cmd->add_option("--lr-max", flags.lr_max, "initial learning rate");
    cmd->add_option("--lr-min", flags.lr_min, "final learning rate");
    cmd->add_option("--reg-mode", flags.reg_mode, "in-loss|decoupled");
}

rae::TrainConfig make_config(const CommonFlags& common, const TrainFlags& train) {
    rae::TrainConfig config;
    config.lambda = train.lambda;
    config.steps = train.steps;
    config.batch_size = train.batch;
    config.lr_max = train.lr_max;
    config.lr_min = train.lr_min;
    config.seed = common.seed;
    config.reg_mode = rae::parse_reg_mode(train.reg_mode);
    config.latent_dim = train.m;
    return config;
}

void write_manifest(const std::string& out_path, const std::string& command,
                    const nlohmann::json& config, const std::vector<std::string>& inputs,
                    const nlohmann::json& timings) {
    nlohmann::json manifest{{"command", command}, {"version", kVersion}, {"config", config}};
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& path : inputs) {
        char hex[17];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(path)));
        digests[path] = hex;
    }
    manifest["inputs"] = digests;
    manifest["timings"] = timings;
    std::ofstream mf(out_path + ".manifest.json");
    if (!mf) throw std::runtime_error("cannot write manifest for " + out_path);
    mf << manifest.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// --- train ------------------------------------------------------------------

int cmd_train(const CommonFlags& common, const TrainFlags& tf, const std::string& out) {
    const auto start = Clock::now();
    const rae::EmbeddingSet corpus =
        rae::load_embeddings(common.input, rae::parse_format(common.format));
    auto [train_set, test_set] = rae::train_test_split(corpus, {common.split, common.seed});
    (void)test_set;

    const rae::TrainConfig config = make_config(common, tf);
    const auto train_start = Clock::now();
    auto [model, history] = rae::train(train_set, config);
    const double train_seconds = seconds_since(train_start);

    rae::save_model(model, out);
    std::ofstream csv(out + ".history.csv");
    if (!csv) throw std::runtime_error("cannot write " + out + ".history.csv");
    history.write_csv(csv);

    write_manifest(out, "train", nlohmann::json::parse(rae::config_to_json(config)),
                   {common.input},
                   {{"train_seconds", train_seconds}, {"total_seconds", seconds_since(start)}});
    std::cout << "trained " << train_set.count() << "x" << train_set.dim() << " -> m=" << tf.m
              << " in " << train_seconds << " s, model written to " << out << "\n";
    return 0;
}

// --- eval -------------------------------------------------------------------

std::string eval_to_json(const std::vector<rae::EvalReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& report : reports) arr.push_back(nlohmann::json::parse(report.to_json()));
    return nlohmann::json{{"reports", arr}}.dump();
}

int cmd_eval(const CommonFlags& common, const std::string& model_arg, const std::string& k_text,
             const std::string& metric_text, std::size_t pca_m, const std::string& out) {
    const auto start = Clock::now();
    const std::vector<std::size_t> ks = parse_k_list(k_text);
    const rae::MetricKind metric = rae::parse_metric(metric_text);
    const rae::EmbeddingSet corpus =
        rae::load_embeddings(common.input, rae::parse_format(common.format));
    auto [train_set, test_set] = rae::train_test_split(corpus, {common.split, common.seed});

    rae::EmbeddingSet reduced{rae::Matrix(1, 1), ""};
    if (model_arg == "pca") {
        if (pca_m == 0) throw std::invalid_argument("eval: --m is required with --model pca");
        const rae::PCAModel pca = rae::pca_fit(train_set, pca_m);
        reduced = rae::pca_transform(pca, test_set);
    } else {
        const rae::RAEModel model = rae::load_model(model_arg);
        if (model.input_dim != test_set.dim())
            throw std::invalid_argument("eval: model expects dim " +
                                        std::to_string(model.input_dim) + ", data has " +
                                        std::to_string(test_set.dim()));
        reduced = rae::EmbeddingSet{rae::encode(model, test_set.vectors), "rae"};
    }

    const auto reports = rae::preservation_accuracy_multi(test_set, reduced, ks, metric);
    const std::string json = eval_to_json(reports);
    write_text(out, json + "\n");
    std::cout << json << "\n";

    std::vector<std::string> inputs{common.input};
    if (model_arg != "pca") inputs.push_back(model_arg);
    write_manifest(out, "eval",
                   {{"model", model_arg},
                    {"k", k_text},
                    {"metric", metric_text},
                    {"split", common.split},
                    {"seed", common.seed},
                    {"m", pca_m}},
                   inputs, {{"total_seconds", seconds_since(start)}});
    return 0;
}

// --- spectrum ---------------------------------------------------------------

int cmd_spectrum(const std::string& model_path, const std::string& out) {
    const auto start = Clock::now();
    const rae::RAEModel model = rae::load_model(model_path);
    const rae::SpectrumReport report = rae::spectrum_report(model.encoder);
    const std::string json = report.to_json();
    write_text(out, json + "\n");
    std::cout << json << "\n";
    write_manifest(out, "spectrum", {{"model", model_path}}, {model_path},
                   {{"total_seconds", seconds_since(start)}});
    return 0;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const CommonFlags& common, TrainFlags tf, const std::string& grid_text,
              const std::string& k_text, const std::string& metric_text, const std::string& out) {
    const auto start = Clock::now();
    const std::vector<double> grid = parse_grid(grid_text);
    const std::vector<std::size_t> ks = parse_k_list(k_text);
    const rae::MetricKind metric = rae::parse_metric(metric_text);
    const rae::EmbeddingSet corpus =
        rae::load_embeddings(common.input, rae::parse_format(common.format));
    auto [train_set, test_set] = rae::train_test_split(corpus, {common.split, common.seed});

    std::ostringstream csv;
    csv << "lambda";
    for (std::size_t k : ks) csv << ",acc_k" << k;
    csv << ",sigma_max,sigma_min,condition_number,train_seconds,status\n";

    for (double lambda : grid) {
        tf.lambda = lambda;
        const rae::TrainConfig config = make_config(common, tf);  // shared seed across the grid
        csv << lambda;
        try {
            const auto row_start = Clock::now();
            auto [model, history] = rae::train(train_set, config);
            const double train_seconds = seconds_since(row_start);
            const rae::EmbeddingSet reduced{rae::encode(model, test_set.vectors), "rae"};
            const auto reports = rae::preservation_accuracy_multi(test_set, reduced, ks, metric);
            const rae::SpectrumReport spec = rae::spectrum_report(model.encoder);
            for (const auto& report : reports) csv << ',' << report.overall;
            csv << ',' << spec.sigma_max << ',' << spec.sigma_min << ',';
            if (std::isinf(spec.condition_number))
                csv << "inf";
            else
                csv << spec.condition_number;
            csv << ',' << train_seconds << ",ok\n";
        } catch (const std::exception& e) {
            for (std::size_t i = 0; i < ks.size(); ++i) csv << ',';
            csv << ",,,,error: " << e.what() << "\n";
        }
    }
    write_text(out, csv.str());
    write_manifest(out, "sweep",
                   {{"grid", grid_text},
                    {"k", k_text},
                    {"metric", metric_text},
                    {"m", tf.m},
                    {"steps", tf.steps},
                    {"batch", tf.batch},
                    {"seed", common.seed},
                    {"split", common.split}},
                   {common.input}, {{"total_seconds", seconds_since(start)}});
    std::cout << "sweep of " << grid.size() << " lambda values written to " << out << "\n";
    return 0;
}

// --- bench ------------------------------------------------------------------

int cmd_bench(const CommonFlags& common, const TrainFlags& tf, const std::string& out) {
    const auto start = Clock::now();
    const rae::EmbeddingSet corpus =
        rae::load_embeddings(common.input, rae::parse_format(common.format));
    auto [train_set, test_set] = rae::train_test_split(corpus, {common.split, common.seed});

    const rae::TrainConfig config = make_config(common, tf);
    const auto train_start = Clock::now();
    auto [model, history] = rae::train(train_set, config);
    const double train_seconds = seconds_since(train_start);

    // transform latency over the full corpus, batched as one matrix
    const auto enc_start = Clock::now();
    const rae::Matrix reduced = rae::encode(model, corpus.vectors);
    const double encode_seconds = seconds_since(enc_start);
    const double per_vector = encode_seconds / static_cast<double>(corpus.count());

    nlohmann::json result{{"train_seconds", train_seconds},
                          {"transform_seconds_total", encode_seconds},
                          {"transform_seconds_per_vector", per_vector},
                          {"vectors", corpus.count()},
                          {"n", corpus.dim()},
                          {"m", tf.m},
                          {"final_loss", history.records.back().total}};
    const std::string json = result.dump();
    write_text(out, json + "\n");
    std::cout << json << "\n";
    write_manifest(out, "bench", nlohmann::json::parse(rae::config_to_json(config)),
                   {common.input}, {{"total_seconds", seconds_since(start)}});
    (void)reduced;
    return 0;
}

// --- convert ----------------------------------------------------------------

int cmd_convert(const std::string& input, const std::string& in_format, const std::string& out,
                const std::string& out_format) {
    const auto start = Clock::now();
    const rae::EmbeddingSet set = rae::load_embeddings(input, rae::parse_format(in_format));
    rae::save_embeddings(set, out, rae::parse_format(out_format));
    write_manifest(out, "convert",
                   {{"input", input}, {"format", in_format}, {"out_format", out_format}}, {input},
                   {{"total_seconds", seconds_since(start)}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-NN preserving dimensionality reduction via a regularized linear autoencoder"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonFlags common;
    TrainFlags tf;
    std::string out;
    std::string model_arg;
    std::string k_text = "5";
    std::string metric_text = "euclidean";
    std::string grid_text = "1e-6,1e-5,1e-4,1e-3,1e-2,1e-1,1e0";
    std::string in_format = "fvecs", out_format = "csv", convert_in;

    auto* train = app.add_subcommand("train", "train an RAE reducer");
    add_common(train, common);
    add_train(train, tf);
    train->add_option("--out", out, "model file")->default_val("model.rae");

    auto* eval = app.add_subcommand("eval", "k-NN preservation accuracy on the test split");
    add_common(eval, common);
    eval->add_option("--model", model_arg, "RAE model file, or 'pca'")->required();
    eval->add_option("--m", tf.m, "latent dimension (pca only)");
    eval->add_option("--k", k_text, "comma-separated k values");
    eval->add_option("--metric", metric_text, "euclidean|cosine");
    eval->add_option("--out", out, "report JSON file")->default_val("eval.json");

    auto* spectrum = app.add_subcommand("spectrum", "singular spectrum of a model's encoder");
    spectrum->add_option("--model", model_arg, "RAE model file")->required();
    spectrum->add_option("--out", out, "report JSON file")->default_val("spectrum.json");

    auto* sweep = app.add_subcommand("sweep", "train/eval/spectrum across a lambda grid");
    add_common(sweep, common);
    add_train(sweep, tf);
    sweep->add_option("--grid", grid_text, "comma-separated lambda values");
    sweep->add_option("--k", k_text, "comma-separated k values");
    sweep->add_option("--metric", metric_text, "euclidean|cosine");
    sweep->add_option("--out", out, "sweep CSV file")->default_val("sweep.csv");

    auto* bench = app.add_subcommand("bench", "training and transform timings");
    add_common(bench, common);
    add_train(bench, tf);
    bench->add_option("--out", out, "timing JSON file")->default_val("bench.json");

    auto* convert = app.add_subcommand("convert", "convert between embedding file formats");
    convert->add_option("--input", convert_in, "source file")->required();
    convert->add_option("--format", in_format, "source format");
    convert->add_option("--out", out, "destination file")->required();
    convert->add_option("--out-format", out_format, "destination format");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (train->parsed()) return cmd_train(common, tf, out);
        if (eval->parsed()) return cmd_eval(common, model_arg, k_text, metric_text, tf.m, out);
        if (spectrum->parsed()) return cmd_spectrum(model_arg, out);
        if (sweep->parsed()) return cmd_sweep(common, tf, grid_text, k_text, metric_text, out);
        if (bench->parsed()) return cmd_bench(common, tf, out);
        if (convert->parsed()) return cmd_convert(convert_in, in_format, out, out_format);
    } catch (const rae::numeric_error& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
