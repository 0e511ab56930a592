#pragma once

#include <string>
#include <vector>

#include "sartts/embedding_store.hpp"
#include "sartts/numerics.hpp"

namespace sartts {

// Token-level semantic embedding matrix, one row per token.
struct SemanticEmbedding {
    Matrix values;  // seq_len x dim

    std::size_t seq_len() const { return values.rows; }
    std::size_t dim() const { return values.cols; }
};

struct RetrievalHit {
    std::string record_id;
    double score = 0.0;  // cosine similarity, in [-1, 1]
    std::size_t rank = 0;
};

// Mean over time steps; the query vector used against the index.
Vector pool_query(const SemanticEmbedding& e);

// Exact brute-force scan. Hits sorted by descending score, ties broken by
// ascending index position, ranks consecutive from 0.
std::vector<RetrievalHit> top_k(const ExemplarIndex& index, const Vector& query, std::size_t k);

}  // namespace sartts
