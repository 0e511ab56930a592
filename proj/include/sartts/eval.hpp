#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sartts/embedding_store.hpp"
#include "sartts/prosody.hpp"

namespace sartts {

// Monotonic alignment between two frame sequences. Starts at (0,0), ends at
// (n-1, m-1), each step advances i, j, or both by 1.
struct AlignmentPath {
    std::vector<std::pair<std::size_t, std::size_t>> steps;
};

struct LabeledPredictions {
    std::vector<Label> gold;
    std::vector<Label> pred;
};

// Support-weighted detection metrics, in percent.
struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double weighted_f1 = 0.0;
};

struct SplitResult {
    std::vector<UtteranceRecord> train, val, test;
};

// Exact dynamic-programming optimum under Euclidean frame distance.
// Backtrace ties prefer diagonal, then (1,0), then (0,1).
std::pair<AlignmentPath, double> dtw_align(const FrameFeatures& x, const FrameFeatures& y);

// Mean over DTW-aligned frame pairs of (10/ln 10) * sqrt(2 * sum_d dc^2),
// with c0 excluded by default.
double mcd(const FrameFeatures& x, const FrameFeatures& y, bool exclude_c0 = true);

// Per-class precision/recall/F1 from the confusion matrix, averaged with
// class-support weights. Zero-denominator ratios count as 0.
MetricsReport detection_metrics(const LabeledPredictions& lp);

// Stratified 8:1:1 split: per label, floor(0.1 n) to val and test, remainder
// to train. Shuffling uses a seeded splitmix64 Fisher-Yates pass per label.
SplitResult dataset_split(const std::vector<UtteranceRecord>& records, std::uint64_t seed);

}  // namespace sartts
