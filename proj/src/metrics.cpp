#include "rae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rae {

MetricKind parse_metric(const std::string& name) {
    if (name == "euclidean") return MetricKind::Euclidean;
    if (name == "cosine") return MetricKind::Cosine;
    throw std::invalid_argument("unknown metric: " + name);
}

std::string metric_name(MetricKind metric) {
    return metric == MetricKind::Euclidean ? "euclidean" : "cosine";
}

double distance(std::span<const double> x, std::span<const double> y, MetricKind metric) {
    if (x.size() != y.size())
        throw std::invalid_argument("distance: dimension mismatch");
    if (metric == MetricKind::Euclidean) {
        double sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[i];
            sum += d * d;
        }
        return std::sqrt(sum);
    }
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    nx = std::sqrt(nx);
    ny = std::sqrt(ny);
    if (nx <= 1e-12 || ny <= 1e-12)
        throw std::invalid_argument("distance: zero-norm vector under cosine metric");
    return 1.0 - dot / (nx * ny);
}

NeighborSet knn(const EmbeddingSet& corpus, std::size_t anchor, std::size_t k, MetricKind metric) {
    const std::size_t n = corpus.count();
    if (anchor >= n) throw std::invalid_argument("knn: anchor out of range");
    if (k == 0 || k > n - 1) throw std::invalid_argument("knn: k must lie in [1, N-1]");

    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    const auto a = corpus.vectors.row(anchor);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == anchor) continue;
        cand.emplace_back(distance(a, corpus.vectors.row(i), metric), i);
    }
    // lexicographic pair order gives the tie-break by smaller index
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());

    NeighborSet out;
    out.anchor = anchor;
    out.neighbors.reserve(k);
    out.distances.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.distances.push_back(cand[i].first);
        out.neighbors.push_back(cand[i].second);
    }
    return out;
}

std::string EvalReport::to_json() const {
    nlohmann::json j{{"k", k},
                     {"metric", metric_name(metric)},
                     {"overall", overall},
                     {"per_anchor", per_anchor}};
    return j.dump();
}

std::vector<EvalReport> preservation_accuracy_multi(const EmbeddingSet& original,
                                                    const EmbeddingSet& reduced,
                                                    const std::vector<std::size_t>& ks,
                                                    MetricKind metric) {
    const std::size_t n = original.count();
    if (n != reduced.count())
        throw std::invalid_argument("preservation_accuracy: corpus sizes differ");
    if (ks.empty()) throw std::invalid_argument("preservation_accuracy: no k values");
    const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
    for (std::size_t k : ks)
        if (k == 0 || k > n - 1)
            throw std::invalid_argument("preservation_accuracy: k must lie in [1, N-1]");

    std::vector<EvalReport> reports(ks.size());
    for (std::size_t r = 0; r < ks.size(); ++r) {
        reports[r].k = ks[r];
        reports[r].metric = metric;
        reports[r].per_anchor.resize(n);
    }

    std::vector<char> in_orig(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
        // One kmax scan per space; the k-NN list for smaller k is its prefix.
        const NeighborSet orig = knn(original, a, kmax, metric);
        const NeighborSet red = knn(reduced, a, kmax, metric);
        for (std::size_t r = 0; r < ks.size(); ++r) {
            const std::size_t k = ks[r];
            std::fill(in_orig.begin(), in_orig.end(), 0);
            for (std::size_t i = 0; i < k; ++i) in_orig[orig.neighbors[i]] = 1;
            std::size_t hits = 0;
            for (std::size_t i = 0; i < k; ++i) hits += in_orig[red.neighbors[i]];
            reports[r].per_anchor[a] = static_cast<double>(hits) / static_cast<double>(k);
        }
    }
    for (auto& rep : reports) {
        double sum = 0.0;
        for (double p : rep.per_anchor) sum += p;
        rep.overall = sum / static_cast<double>(n);
    }
    return reports;
}

EvalReport preservation_accuracy(const EmbeddingSet& original, const EmbeddingSet& reduced,
                                 std::size_t k, MetricKind metric) {
    return preservation_accuracy_multi(original, reduced, {k}, metric).front();
}

}  // namespace rae
