#include "rae/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rae {

namespace {

[[noreturn]] void load_fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("load_embeddings: " + path + ": " + what);
}

EmbeddingSet from_f32(std::size_t rows, std::size_t cols, const std::vector<float>& values,
                      const std::string& path) {
    std::vector<double> data(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            load_fail(path, "non-finite value at element " + std::to_string(i));
        data[i] = static_cast<double>(values[i]);
    }
    return EmbeddingSet{Matrix(rows, cols, std::move(data)), path};
}

EmbeddingSet load_fvecs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) load_fail(path, "cannot open");
    std::vector<float> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;
    while (true) {
        std::int32_t d = 0;
        in.read(reinterpret_cast<char*>(&d), sizeof(d));
        if (in.gcount() == 0) break;
        if (in.gcount() != sizeof(d))
            load_fail(path, "truncated dimension header at byte " + std::to_string(offset));
        if (d <= 0) load_fail(path, "non-positive dimension at byte " + std::to_string(offset));
        if (cols == 0)
            cols = static_cast<std::size_t>(d);
        else if (static_cast<std::size_t>(d) != cols)
            load_fail(path, "inconsistent dimension " + std::to_string(d) + " (expected " +
                                std::to_string(cols) + ") at byte " + std::to_string(offset));
        offset += sizeof(d);
        std::vector<float> rec(static_cast<std::size_t>(d));
        in.read(reinterpret_cast<char*>(rec.data()),
                static_cast<std::streamsize>(rec.size() * sizeof(float)));
        if (static_cast<std::size_t>(in.gcount()) != rec.size() * sizeof(float))
            load_fail(path, "truncated vector at byte " + std::to_string(offset));
        offset += rec.size() * sizeof(float);
        values.insert(values.end(), rec.begin(), rec.end());
        ++rows;
    }
    if (rows == 0) load_fail(path, "empty file");
    return from_f32(rows, cols, values, path);
}

EmbeddingSet load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) load_fail(path, "cannot open");
    std::vector<float> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t fields = 0;
        const char* p = line.c_str();
        while (true) {
            char* end = nullptr;
            const float v = std::strtof(p, &end);
            if (end == p)
                load_fail(path, "malformed number on line " + std::to_string(line_no));
            values.push_back(v);
            ++fields;
            p = end;
            while (*p == ' ' || *p == '\t') ++p;
            if (*p == ',') {
                ++p;
            } else if (*p == '\0' || *p == '\r') {
                break;
            } else {
                load_fail(path, "unexpected character on line " + std::to_string(line_no));
            }
        }
        if (cols == 0)
            cols = fields;
        else if (fields != cols)
            load_fail(path, "line " + std::to_string(line_no) + " has " + std::to_string(fields) +
                                " fields, expected " + std::to_string(cols));
        ++rows;
    }
    if (rows == 0) load_fail(path, "empty file");
    return from_f32(rows, cols, values, path);
}

EmbeddingSet load_rawf32(const std::string& path) {
    const std::string manifest_path = path + ".manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) load_fail(path, "missing manifest " + manifest_path);
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        load_fail(path, std::string("bad manifest: ") + e.what());
    }
    if (!manifest.contains("rows") || !manifest.contains("cols"))
        load_fail(path, "manifest missing rows/cols");
    const auto rows = manifest["rows"].get<std::int64_t>();
    const auto cols = manifest["cols"].get<std::int64_t>();
    if (rows <= 0 || cols <= 0) load_fail(path, "manifest rows/cols must be positive");

    std::ifstream in(path, std::ios::binary);
    if (!in) load_fail(path, "cannot open");
    const std::size_t expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    std::vector<float> values(expected);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(expected * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != expected * sizeof(float))
        load_fail(path, "file shorter than manifest rows*cols");
    in.peek();
    if (!in.eof()) load_fail(path, "file longer than manifest rows*cols");
    return from_f32(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), values, path);
}

void write_or_throw(std::ofstream& out, const std::string& path) {
    if (!out) throw std::runtime_error("save_embeddings: write failed: " + path);
}

void save_to_stream(const EmbeddingSet& set, std::ofstream& out, const std::string& path,
                    FileFormat format) {
    const std::size_t rows = set.count();
    const std::size_t cols = set.dim();
    switch (format) {
        case FileFormat::Fvecs: {
            const std::int32_t d = static_cast<std::int32_t>(cols);
            std::vector<float> rec(cols);
            for (std::size_t i = 0; i < rows; ++i) {
                out.write(reinterpret_cast<const char*>(&d), sizeof(d));
                for (std::size_t j = 0; j < cols; ++j)
                    rec[j] = static_cast<float>(set.vectors(i, j));
                out.write(reinterpret_cast<const char*>(rec.data()),
                          static_cast<std::streamsize>(cols * sizeof(float)));
            }
            break;
        }
        case FileFormat::Csv: {
            char buf[48];
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < cols; ++j) {
                    // %.9g round-trips f32 exactly
                    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<float>(set.vectors(i, j)));
                    if (j) out.put(',');
                    out << buf;
                }
                out.put('\n');
            }
            break;
        }
        case FileFormat::RawF32: {
            std::vector<float> rec(cols);
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < cols; ++j)
                    rec[j] = static_cast<float>(set.vectors(i, j));
                out.write(reinterpret_cast<const char*>(rec.data()),
                          static_cast<std::streamsize>(cols * sizeof(float)));
            }
            break;
        }
    }
    write_or_throw(out, path);
}

}  // namespace

FileFormat parse_format(const std::string& name) {
    if (name == "fvecs") return FileFormat::Fvecs;
    if (name == "csv") return FileFormat::Csv;
    if (name == "rawf32") return FileFormat::RawF32;
    throw std::invalid_argument("unknown format: " + name);
}

std::string format_name(FileFormat format) {
    switch (format) {
        case FileFormat::Fvecs: return "fvecs";
        case FileFormat::Csv: return "csv";
        case FileFormat::RawF32: return "rawf32";
    }
    return "?";
}

EmbeddingSet load_embeddings(const std::string& path, FileFormat format) {
    switch (format) {
        case FileFormat::Fvecs: return load_fvecs(path);
        case FileFormat::Csv: return load_csv(path);
        case FileFormat::RawF32: return load_rawf32(path);
    }
    throw std::invalid_argument("load_embeddings: bad format");
}

void save_embeddings(const EmbeddingSet& set, const std::string& path, FileFormat format) {
    // Stage through a temp file so a failed write leaves nothing behind.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, format == FileFormat::Csv ? std::ios::out
                                                         : std::ios::out | std::ios::binary);
        if (!out) throw std::runtime_error("save_embeddings: cannot open " + tmp);
        save_to_stream(set, out, tmp, format);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("save_embeddings: cannot move into place: " + path + ": " +
                                 ec.message());
    }
    if (format == FileFormat::RawF32) {
        std::ofstream mf(path + ".manifest.json");
        if (!mf) throw std::runtime_error("save_embeddings: cannot open manifest for " + path);
        nlohmann::json manifest{{"rows", set.count()}, {"cols", set.dim()}};
        mf << manifest.dump() << "\n";
        write_or_throw(mf, path + ".manifest.json");
    }
}

std::pair<EmbeddingSet, EmbeddingSet> train_test_split(const EmbeddingSet& set,
                                                       const SplitSpec& spec) {
    const std::size_t n = set.count();
    if (n == 0) throw std::invalid_argument("train_test_split: empty set");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw std::invalid_argument("train_test_split: fraction must lie in (0,1)");
    const std::size_t train_n = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * spec.train_fraction));
    if (train_n == 0 || train_n == n)
        throw std::invalid_argument("train_test_split: degenerate fraction leaves an empty side");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(spec.seed);
    rng.shuffle(order);

    auto take = [&](std::size_t begin, std::size_t end, const char* tag) {
        Matrix rows(end - begin, set.dim());
        for (std::size_t i = begin; i < end; ++i) {
            const auto src = set.vectors.row(order[i]);
            std::copy(src.begin(), src.end(), rows.row(i - begin).begin());
        }
        return EmbeddingSet{std::move(rows), set.source + ":" + tag};
    };
    return {take(0, train_n, "train"), take(train_n, n, "test")};
}

BatchStream::BatchStream(const EmbeddingSet& set, std::size_t batch_size, std::uint64_t seed)
    : set_(set), batch_size_(batch_size), rng_(seed), order_(set.count()) {
    if (batch_size == 0 || batch_size > set.count())
        throw std::invalid_argument("BatchStream: batch_size must lie in [1, N]");
    std::iota(order_.begin(), order_.end(), 0);
    rng_.shuffle(order_);
}

Matrix BatchStream::next() {
    const std::size_t remaining = order_.size() - cursor_;
    const std::size_t take = std::min(batch_size_, remaining);
    Matrix batch(take, set_.dim());
    for (std::size_t i = 0; i < take; ++i) {
        const auto src = set_.vectors.row(order_[cursor_ + i]);
        std::copy(src.begin(), src.end(), batch.row(i).begin());
    }
    cursor_ += take;
    if (cursor_ == order_.size()) {
        cursor_ = 0;
        rng_.shuffle(order_);
    }
    return batch;
}

}  // namespace rae
