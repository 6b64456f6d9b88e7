#include "crc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crc/error.hpp"

namespace crc {
namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw EvaluationError("scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                              std::to_string(labels.size()) + ")");
    std::size_t pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw EvaluationError("labels must be 0 or 1");
        pos += static_cast<std::size_t>(l);
    }
    if (pos == 0 || pos == labels.size()) throw EvaluationError("labels must contain both classes");
    for (double s : scores)
        if (!std::isfinite(s)) throw EvaluationError("non-finite score");
}

}  // namespace

std::vector<double> normalize(std::span<const double> raw) {
    if (raw.empty()) throw DataError("cannot normalize an empty series");
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double range = *hi - *lo;
    std::vector<double> out(raw.size(), 0.0);
    if (range > 0.0)
        for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::clamp((raw[i] - *lo) / range, 0.0, 1.0);
    return out;
}

std::vector<RocPoint> roc_sweep(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double neg = static_cast<double>(labels.size()) - pos;
    std::vector<RocPoint> out;
    out.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double thr = scores[order[i]];
        while (i < order.size() && scores[order[i]] == thr) {
            (labels[order[i]] ? tp : fp) += 1.0;
            ++i;
        }
        out.push_back({thr, fp / neg, tp / pos});
    }
    return out;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels);
    const std::size_t m = scores.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Average 1-based ranks over tied groups; all quantities are half-integers.
    double rank_sum = 0.0, pos = 0.0;
    for (std::size_t i = 0; i < m;) {
        std::size_t j = i;
        while (j < m && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]]) {
                rank_sum += avg_rank;
                pos += 1.0;
            }
        i = j;
    }
    const double neg = static_cast<double>(m) - pos;
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double eer(std::span<const double> scores, std::span<const int> labels) {
    const auto sweep = roc_sweep(scores, labels);
    // gap = FPR - FNR rises from -1 at (0,0) to +1 at (1,1).
    auto gap = [](const RocPoint& p) { return p.fpr - (1.0 - p.tpr); };
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        const double g0 = gap(sweep[i - 1]), g1 = gap(sweep[i]);
        if (g1 < 0.0) continue;
        const double t = g1 == g0 ? 0.0 : -g0 / (g1 - g0);
        return sweep[i - 1].fpr + t * (sweep[i].fpr - sweep[i - 1].fpr);
    }
    return 1.0;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels) {
    return EvalReport{roc_auc(scores, labels), eer(scores, labels), roc_sweep(scores, labels)};
}

}  // namespace crc
