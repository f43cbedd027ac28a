#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "rae/matrix.hpp"
#include "rae/rng.hpp"

namespace rae {

struct EmbeddingSet {
    Matrix vectors;      // N rows x n cols
    std::string source;  // free-text provenance

    std::size_t count() const { return vectors.rows(); }
    std::size_t dim() const { return vectors.cols(); }
};

enum class FileFormat { Fvecs, Csv, RawF32 };

FileFormat parse_format(const std::string& name);
std::string format_name(FileFormat format);

// fvecs: per vector an LE int32 dimension then that many LE f32 values.
// csv: one vector per line, comma-separated decimal floats, no header.
// rawf32: LE f32 row-major array plus "<path>.manifest.json" {"rows","cols"}.
EmbeddingSet load_embeddings(const std::string& path, FileFormat format);
void save_embeddings(const EmbeddingSet& set, const std::string& path, FileFormat format);

struct SplitSpec {
    double train_fraction = 0.9;
    std::uint64_t seed = 0;
};

// Shuffled row partition, deterministic in the seed. Train side gets
// floor(N * fraction) rows; both sides must end up nonempty.
std::pair<EmbeddingSet, EmbeddingSet> train_test_split(const EmbeddingSet& set,
                                                       const SplitSpec& spec);

// Unbounded stream of shuffled mini-batches. Each epoch draws a fresh
// seed-derived permutation; the trailing short batch of an epoch is emitted
// as-is.
class BatchStream {
public:
    BatchStream(const EmbeddingSet& set, std::size_t batch_size, std::uint64_t seed);

    Matrix next();

private:
    const EmbeddingSet& set_;
    std::size_t batch_size_;
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

}  // namespace rae
