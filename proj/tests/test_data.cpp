#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "rae/data.hpp"
#include "test_util.hpp"

using rae::EmbeddingSet;
using rae::FileFormat;
using testutil::TempDir;

namespace {

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Multiset of rows, rounded through f32 so file round trips compare equal.
std::multiset<std::vector<float>> row_multiset(const EmbeddingSet& set) {
    std::multiset<std::vector<float>> rows;
    for (std::size_t i = 0; i < set.count(); ++i) {
        std::vector<float> row(set.dim());
        for (std::size_t j = 0; j < set.dim(); ++j)
            row[j] = static_cast<float>(set.vectors(i, j));
        rows.insert(std::move(row));
    }
    return rows;
}

}  // namespace

TEST_CASE("fvecs fixture loads") {
    TempDir dir("fvecs");
    const std::string path = dir.file("two.fvecs");
    {
        std::ofstream out(path, std::ios::binary);
        auto put = [&](std::int32_t d, std::vector<float> v) {
            out.write(reinterpret_cast<const char*>(&d), 4);
            out.write(reinterpret_cast<const char*>(v.data()), 4 * v.size());
        };
        put(2, {1.0f, 0.0f});
        put(2, {0.0f, 1.0f});
    }
    const EmbeddingSet set = rae::load_embeddings(path, FileFormat::Fvecs);
    CHECK(set.count() == 2);
    CHECK(set.dim() == 2);
    CHECK(set.vectors(0, 0) == 1.0);
    CHECK(set.vectors(1, 1) == 1.0);

    SUBCASE("save(load(f)) is byte-identical") {
        const std::string copy = dir.file("copy.fvecs");
        rae::save_embeddings(set, copy, FileFormat::Fvecs);
        CHECK(read_bytes(copy) == read_bytes(path));
    }

    SUBCASE("inconsistent per-vector dims rejected") {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        const std::int32_t d = 3;
        const float v[3] = {1, 2, 3};
        out.write(reinterpret_cast<const char*>(&d), 4);
        out.write(reinterpret_cast<const char*>(v), 12);
        out.close();
        CHECK_THROWS_AS(rae::load_embeddings(path, FileFormat::Fvecs), std::runtime_error);
    }
}

TEST_CASE("csv fixture loads") {
    TempDir dir("csv");
    const std::string path = dir.file("a.csv");
    std::ofstream(path) << "1.5,2.5\n3.0,4.0\n";
    const EmbeddingSet set = rae::load_embeddings(path, FileFormat::Csv);
    CHECK(set.count() == 2);
    CHECK(set.dim() == 2);
    CHECK(set.vectors(0, 1) == 2.5);
    CHECK(set.vectors(1, 0) == 3.0);
}

TEST_CASE("malformed inputs are rejected with context") {
    TempDir dir("bad");
    const std::string path = dir.file("bad.csv");
    std::ofstream(path) << "1.0,2.0\n3.0,oops\n";
    CHECK_THROWS_WITH_AS(rae::load_embeddings(path, FileFormat::Csv),
                         doctest::Contains("line 2"), std::runtime_error);

    const std::string empty = dir.file("empty.fvecs");
    { std::ofstream touch(empty); }
    CHECK_THROWS_AS(rae::load_embeddings(empty, FileFormat::Fvecs), std::runtime_error);

    const std::string raw = dir.file("short.rawf32");
    std::ofstream(raw, std::ios::binary) << "\0\0\0\0";
    std::ofstream(raw + ".manifest.json") << R"({"rows": 2, "cols": 3})";
    CHECK_THROWS_AS(rae::load_embeddings(raw, FileFormat::RawF32), std::runtime_error);
}

TEST_CASE("round trip reproduces values at f32 precision for all formats") {
    TempDir dir("roundtrip");
    const EmbeddingSet original = testutil::random_embeddings(100, 32, 5);
    for (FileFormat format : {FileFormat::Fvecs, FileFormat::Csv, FileFormat::RawF32}) {
        const std::string path = dir.file("set." + rae::format_name(format));
        rae::save_embeddings(original, path, format);
        const EmbeddingSet loaded = rae::load_embeddings(path, format);
        REQUIRE(loaded.count() == original.count());
        REQUIRE(loaded.dim() == original.dim());
        for (std::size_t i = 0; i < original.count(); ++i)
            for (std::size_t j = 0; j < original.dim(); ++j)
                CHECK(loaded.vectors(i, j) ==
                      static_cast<double>(static_cast<float>(original.vectors(i, j))));
    }
}

TEST_CASE("unwritable path errors without leaving a partial file") {
    const EmbeddingSet set = testutil::random_embeddings(3, 2, 1);
    const std::string path = "/nonexistent_dir_for_rae/out.fvecs";
    CHECK_THROWS_AS(rae::save_embeddings(set, path, FileFormat::Fvecs), std::runtime_error);
    CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("train_test_split sizes, determinism, multiset identity") {
    const EmbeddingSet set = testutil::random_embeddings(10, 4, 9);
    const rae::SplitSpec spec{0.9, 123};
    auto [train, test] = rae::train_test_split(set, spec);
    CHECK(train.count() == 9);
    CHECK(test.count() == 1);

    auto [train2, test2] = rae::train_test_split(set, spec);
    CHECK(train.vectors == train2.vectors);
    CHECK(test.vectors == test2.vectors);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 2 + seed * 13 % 97;
        const EmbeddingSet s = testutil::random_embeddings(n, 3, 40 + seed);
        auto [a, b] = rae::train_test_split(s, {0.5 + 0.04 * static_cast<double>(seed % 5), seed});
        CHECK(a.count() + b.count() == n);
        auto both = row_multiset(a);
        both.merge(row_multiset(b));
        CHECK(both == row_multiset(s));
    }
}

TEST_CASE("train_test_split rejects degenerate inputs") {
    const EmbeddingSet set = testutil::random_embeddings(10, 2, 1);
    CHECK_THROWS_AS(rae::train_test_split(set, {0.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(rae::train_test_split(set, {1.0, 1}), std::invalid_argument);
    const EmbeddingSet tiny = testutil::random_embeddings(1, 2, 1);
    CHECK_THROWS_AS(rae::train_test_split(tiny, {0.9, 1}), std::invalid_argument);
}

TEST_CASE("batch stream epoch structure and determinism") {
    const EmbeddingSet set = testutil::random_embeddings(5, 3, 77);
    rae::BatchStream stream(set, 2, 7);
    const rae::Matrix b1 = stream.next();
    const rae::Matrix b2 = stream.next();
    const rae::Matrix b3 = stream.next();
    CHECK(b1.rows() == 2);
    CHECK(b2.rows() == 2);
    CHECK(b3.rows() == 1);

    // one epoch covers each row exactly once
    EmbeddingSet epoch{rae::Matrix(5, 3), "epoch"};
    std::size_t r = 0;
    for (const rae::Matrix* b : {&b1, &b2, &b3})
        for (std::size_t i = 0; i < b->rows(); ++i, ++r)
            std::copy(b->row(i).begin(), b->row(i).end(), epoch.vectors.row(r).begin());
    CHECK(row_multiset(epoch) == row_multiset(set));

    // identical seeds give identical streams, across epochs too
    rae::BatchStream s1(set, 2, 99);
    rae::BatchStream s2(set, 2, 99);
    for (int i = 0; i < 10; ++i) CHECK(s1.next() == s2.next());

    CHECK_THROWS_AS(rae::BatchStream(set, 6, 1), std::invalid_argument);
}
