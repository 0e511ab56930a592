#include "sartts/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "sartts/errors.hpp"

namespace sartts {

Vector pool_query(const SemanticEmbedding& e) {
    if (e.values.rows == 0) throw EmptyInputError("pool_query: empty embedding");
    return mean_pool_rows(e.values);
}

std::vector<RetrievalHit> top_k(const ExemplarIndex& index, const Vector& query, std::size_t k) {
    if (query.dim != index.dim)
        throw DimensionError("top_k: query dim " + std::to_string(query.dim) +
                             " != index dim " + std::to_string(index.dim));
    if (k == 0 || k > index.records.size())
        throw InvalidKError("k=" + std::to_string(k) + " outside [1, " +
                            std::to_string(index.records.size()) + "]");
    if (norm(query) == 0.0) throw ZeroNormError("top_k: zero-norm query");

    std::vector<double> scores(index.records.size());
    for (std::size_t i = 0; i < index.records.size(); ++i)
        scores[i] = cosine_similarity(query, index.records[i].embedding);

    std::vector<std::size_t> order(index.records.size());
    std::iota(order.begin(), order.end(), 0);
    // stable sort keeps insertion order among equal scores
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RetrievalHit> hits;
    hits.reserve(k);
    for (std::size_t r = 0; r < k; ++r)
        hits.push_back({index.records[order[r]].id, scores[order[r]], r});
    return hits;
}

}  // namespace sartts
