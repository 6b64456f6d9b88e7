#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "crc/layers.hpp"

namespace crc {

// Three fully connected layers C -> C/4 -> C/4 -> C, ReLU hidden, sigmoid out.
struct ScoreMlp {
    std::array<DenseLayer, 3> layers;

    static ScoreMlp init(std::size_t channels, Rng& rng);
};

struct DecomposerParams {
    ScoreMlp avg_branch;  // alpha, fed by the average-pooled difference
    ScoreMlp max_branch;  // beta, fed by the max-pooled difference

    static DecomposerParams init(std::size_t channels, Rng& rng);
    std::vector<Tensor*> tensors();
};

struct PoolStats {
    Var f_avg, fp_avg, f_max, fp_max;
};

struct DecomposedFeatures {
    Var private_part;  // F_p = w * F
    Var shared_part;   // F_s = (1 - w) * F'
    Var alpha;
    Var beta;
};

// Switches that drop one pooling route (the remaining score stands in for both).
struct DecomposerAblation {
    bool use_avg_pool = true;
    bool use_max_pool = true;
};

PoolStats pool_stats(Var features, Var prototype);

Var score_mlp(Binder& bind, const ScoreMlp& mlp, Var input);

// alpha = MLP(f_avg - f'_avg; theta1), beta = MLP(f_max - f'_max; theta2)
std::pair<Var, Var> difference_scores(Binder& bind, const PoolStats& stats, const DecomposerParams& params);

// w = (alpha + beta) / 2 per channel; F_p = w * F, F_s = (1 - w) * F'
std::pair<Var, Var> decompose(Var features, Var prototype, Var alpha, Var beta);

DecomposedFeatures run_decomposer(Binder& bind, const DecomposerParams& params, Var features, Var prototype,
                                  const DecomposerAblation& ablation = {});

}  // namespace crc
