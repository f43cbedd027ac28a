#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rae/data.hpp"
#include "test_util.hpp"

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(RAE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("cli train, eval, spectrum, convert, sweep") {
    testutil::TempDir dir("cli");
    const std::string data_path = dir.file("corpus.fvecs");
    rae::save_embeddings(testutil::random_embeddings(200, 8, 42), data_path,
                         rae::FileFormat::Fvecs);

    const std::string model = dir.file("model.rae");
    const std::string train_flags = "train --input " + data_path + " --m 4 --lambda 1e-4 --seed 7 "
                                    "--steps 50 --batch 32 --out " + model;

    SUBCASE("train smoke and byte-identical rerun") {
        REQUIRE(run(train_flags) == 0);
        const std::string first = read_bytes(model);
        CHECK_FALSE(first.empty());
        CHECK(std::ifstream(model + ".history.csv").good());
        CHECK(std::ifstream(model + ".manifest.json").good());

        REQUIRE(run(train_flags) == 0);
        CHECK(read_bytes(model) == first);
    }

    SUBCASE("m >= n is a validation error") {
        CHECK(run("train --input " + data_path + " --m 500 --out " + dir.file("x.rae")) == 2);
    }

    SUBCASE("missing required flag is a usage error") {
        CHECK(run("train --input " + data_path) == 1);
        CHECK(run("definitely-not-a-command") == 1);
    }

    SUBCASE("eval on a trained model and on pca, identical on rerun") {
        REQUIRE(run(train_flags) == 0);
        const std::string report = dir.file("eval.json");
        const std::string eval_flags = "eval --input " + data_path + " --model " + model +
                                       " --k 1,5 --seed 7 --out " + report;
        REQUIRE(run(eval_flags) == 0);
        const std::string first = read_bytes(report);
        CHECK(first.find("\"overall\"") != std::string::npos);
        REQUIRE(run(eval_flags) == 0);
        CHECK(read_bytes(report) == first);

        CHECK(run("eval --input " + data_path + " --model pca --m 4 --k 5 --out " +
                  dir.file("pca.json")) == 0);
        // pca without --m is a validation error
        CHECK(run("eval --input " + data_path + " --model pca --k 5 --out " +
                  dir.file("bad.json")) == 2);
    }

    SUBCASE("spectrum of a trained model") {
        REQUIRE(run(train_flags) == 0);
        const std::string report = dir.file("spectrum.json");
        REQUIRE(run("spectrum --model " + model + " --out " + report) == 0);
        const std::string json = read_bytes(report);
        CHECK(json.find("\"sigma_max\"") != std::string::npos);
        CHECK(run("spectrum --model " + data_path + " --out " + report) == 2);  // not a model
    }

    SUBCASE("convert round trip restores the original bytes") {
        const std::string csv = dir.file("corpus.csv");
        const std::string back = dir.file("back.fvecs");
        REQUIRE(run("convert --input " + data_path + " --format fvecs --out " + csv +
                    " --out-format csv") == 0);
        REQUIRE(run("convert --input " + csv + " --format csv --out " + back +
                    " --out-format fvecs") == 0);
        CHECK(read_bytes(back) == read_bytes(data_path));

        CHECK(run("convert --input " + dir.file("missing.fvecs") + " --out " +
                  dir.file("y.csv")) == 2);
        CHECK_FALSE(std::ifstream(dir.file("y.csv")).good());
    }

    SUBCASE("single-point sweep agrees with train+eval+spectrum") {
        const std::string sweep_csv = dir.file("sweep.csv");
        REQUIRE(run("sweep --input " + data_path + " --m 4 --grid 0 --k 5 --seed 7 --steps 50 "
                    "--batch 32 --out " + sweep_csv) == 0);
        std::ifstream in(sweep_csv);
        std::string header, row;
        REQUIRE(std::getline(in, header));
        REQUIRE(std::getline(in, row));
        CHECK(header == "lambda,acc_k5,sigma_max,sigma_min,condition_number,train_seconds,status");
        CHECK(row.substr(row.rfind(',') + 1) == "ok");

        // plain train + eval with the same settings reproduces the accuracy cell
        const std::string model0 = dir.file("model0.rae");
        REQUIRE(run("train --input " + data_path + " --m 4 --lambda 0 --seed 7 --steps 50 "
                    "--batch 32 --out " + model0) == 0);
        const std::string report = dir.file("eval0.json");
        REQUIRE(run("eval --input " + data_path + " --model " + model0 + " --k 5 --seed 7 --out " +
                    report) == 0);
        std::stringstream cell(row);
        std::string lambda_field, acc_field;
        std::getline(cell, lambda_field, ',');
        std::getline(cell, acc_field, ',');
        const std::string eval_json = read_bytes(report);
        const std::size_t pos = eval_json.find("\"overall\":");
        REQUIRE(pos != std::string::npos);
        const double from_eval = std::strtod(eval_json.c_str() + pos + 10, nullptr);
        CHECK(from_eval == doctest::Approx(std::stod(acc_field)).epsilon(1e-5));
    }
}
