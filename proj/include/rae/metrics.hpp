#pragma once

#include <span>
#include <string>
#include <vector>

#include "rae/data.hpp"

namespace rae {

enum class MetricKind { Euclidean, Cosine };

MetricKind parse_metric(const std::string& name);
std::string metric_name(MetricKind metric);

// Smaller always means nearer: cosine is reported as 1 - similarity.
double distance(std::span<const double> x, std::span<const double> y, MetricKind metric);

struct NeighborSet {
    std::size_t anchor = 0;
    std::vector<std::size_t> neighbors;  // nearest first, ties broken by index
    std::vector<double> distances;
};

NeighborSet knn(const EmbeddingSet& corpus, std::size_t anchor, std::size_t k, MetricKind metric);

struct EvalReport {
    std::size_t k = 0;
    MetricKind metric = MetricKind::Euclidean;
    std::vector<double> per_anchor;
    double overall = 0.0;

    std::string to_json() const;
};

// P_a = |N_k(a) in original  ∩  N_k(a) in reduced| / k, averaged over anchors.
// Neighbor sets are compared as unordered sets.
EvalReport preservation_accuracy(const EmbeddingSet& original, const EmbeddingSet& reduced,
                                 std::size_t k, MetricKind metric);

// Shared-scan variant for several k values at once; each entry equals the
// corresponding single-k preservation_accuracy result.
std::vector<EvalReport> preservation_accuracy_multi(const EmbeddingSet& original,
                                                    const EmbeddingSet& reduced,
                                                    const std::vector<std::size_t>& ks,
                                                    MetricKind metric);

}  // namespace rae
