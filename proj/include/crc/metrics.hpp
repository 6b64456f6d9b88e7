#pragma once

#include <span>
#include <vector>

namespace crc {

// (x - min) / (max - min); a constant series maps to zeros.
std::vector<double> normalize(std::span<const double> raw);

struct RocPoint {
    double threshold;  // score >= threshold counts as anomalous
    double fpr;
    double tpr;
};

// Operating points from (0,0) to (1,1), one per distinct score, descending.
std::vector<RocPoint> roc_sweep(std::span<const double> scores, std::span<const int> labels);

// Mann-Whitney statistic P(s+ > s-) + 0.5 P(s+ == s-), via average ranks.
// Throws EvaluationError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Point where FPR = 1 - TPR, interpolated linearly along the sweep.
double eer(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
    double auc = 0.0;
    double eer = 0.0;
    std::vector<RocPoint> sweep;
};

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels);

}  // namespace crc
