#include "sartts/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sartts/errors.hpp"

namespace sartts {

namespace {

double frame_dist(const Matrix& x, std::size_t i, const Matrix& y, std::size_t j) {
    double s = 0.0;
    for (std::size_t d = 0; d < x.cols; ++d) {
        const double diff = x.at(i, d) - y.at(j, d);
        s += diff * diff;
    }
    return std::sqrt(s);
}

}  // namespace

std::pair<AlignmentPath, double> dtw_align(const FrameFeatures& x, const FrameFeatures& y) {
    if (x.dim() != y.dim()) throw DimensionError("dtw_align: feature dim mismatch");
    if (x.n_frames() == 0 || y.n_frames() == 0)
        throw EmptyInputError("dtw_align: empty sequence");

    const std::size_t n = x.n_frames(), m = y.n_frames();
    const double inf = std::numeric_limits<double>::infinity();
    Matrix cost(n, m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = frame_dist(x.values, i, y.values, j);
            double best = inf;
            if (i == 0 && j == 0)
                best = 0.0;
            else {
                if (i > 0 && j > 0) best = std::min(best, cost.at(i - 1, j - 1));
                if (i > 0) best = std::min(best, cost.at(i - 1, j));
                if (j > 0) best = std::min(best, cost.at(i, j - 1));
            }
            cost.at(i, j) = d + best;
        }
    }

    // backtrace, preferring diagonal, then (1,0), then (0,1)
    AlignmentPath path;
    std::size_t i = n - 1, j = m - 1;
    path.steps.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && cost.at(i - 1, j - 1) <= cost.at(i - 1, j) &&
            cost.at(i - 1, j - 1) <= cost.at(i, j - 1)) {
            --i;
            --j;
        } else if (i > 0 && (j == 0 || cost.at(i - 1, j) <= cost.at(i, j - 1))) {
            --i;
        } else {
            --j;
        }
        path.steps.emplace_back(i, j);
    }
    std::reverse(path.steps.begin(), path.steps.end());
    return {std::move(path), cost.at(n - 1, m - 1)};
}

double mcd(const FrameFeatures& x, const FrameFeatures& y, bool exclude_c0) {
    if (x.dim() != y.dim()) throw DimensionError("mcd: cepstral dim mismatch");
    const auto [path, cost] = dtw_align(x, y);
    const std::size_t d0 = exclude_c0 ? 1 : 0;
    if (d0 >= x.dim()) throw ParameterError("mcd: no coefficients left after excluding c0");

    const double k = 10.0 / std::log(10.0);
    double total = 0.0;
    for (const auto& [i, j] : path.steps) {
        double s = 0.0;
        for (std::size_t d = d0; d < x.dim(); ++d) {
            const double diff = x.values.at(i, d) - y.values.at(j, d);
            s += diff * diff;
        }
        total += k * std::sqrt(2.0 * s);
    }
    return total / static_cast<double>(path.steps.size());
}

MetricsReport detection_metrics(const LabeledPredictions& lp) {
    if (lp.gold.empty() || lp.gold.size() != lp.pred.size())
        throw ValidationError("detection_metrics: gold/pred must be non-empty and equal length");

    const Label classes[2] = {Label::sarcastic, Label::non_sarcastic};
    MetricsReport rep;
    for (Label cls : classes) {
        std::size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < lp.gold.size(); ++i) {
            const bool g = lp.gold[i] == cls;
            const bool p = lp.pred[i] == cls;
            support += g;
            tp += g && p;
            fp += !g && p;
            fn += g && !p;
        }
        const double prec = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double rec = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double f1 = (prec + rec > 0.0) ? 2.0 * prec * rec / (prec + rec) : 0.0;
        const double w = static_cast<double>(support) / static_cast<double>(lp.gold.size());
        rep.precision += w * prec;
        rep.recall += w * rec;
        rep.weighted_f1 += w * f1;
    }
    rep.precision *= 100.0;
    rep.recall *= 100.0;
    rep.weighted_f1 *= 100.0;
    return rep;
}

SplitResult dataset_split(const std::vector<UtteranceRecord>& records, std::uint64_t seed) {
    if (records.empty()) throw EmptyInputError("dataset_split: no records");

    SplitResult out;
    Rng rng(seed);
    for (Label cls : {Label::sarcastic, Label::non_sarcastic}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < records.size(); ++i)
            if (records[i].label == cls) idx.push_back(i);
        if (idx.empty()) continue;

        // Fisher-Yates
        for (std::size_t i = idx.size() - 1; i > 0; --i)
            std::swap(idx[i], idx[rng.below(i + 1)]);

        const std::size_t n_val = idx.size() / 10;
        const std::size_t n_test = idx.size() / 10;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto& r = records[idx[i]];
            if (i < n_val)
                out.val.push_back(r);
            else if (i < n_val + n_test)
                out.test.push_back(r);
            else
                out.train.push_back(r);
        }
    }
    return out;
}

}  // namespace sartts
