#include "crc/decomposer.hpp"

#include <algorithm>

#include "crc/error.hpp"

namespace crc {

ScoreMlp ScoreMlp::init(std::size_t channels, Rng& rng) {
    const std::size_t hidden = std::max<std::size_t>(1, channels / 4);
    // Zero biases: equal F and F' give a zero input and exactly 0.5 scores.
    ScoreMlp m;
    m.layers[0] = DenseLayer::init(channels, hidden, rng, /*zero_bias=*/true);
    m.layers[1] = DenseLayer::init(hidden, hidden, rng, /*zero_bias=*/true);
    m.layers[2] = DenseLayer::init(hidden, channels, rng, /*zero_bias=*/true);
    return m;
}

DecomposerParams DecomposerParams::init(std::size_t channels, Rng& rng) {
    DecomposerParams p;
    p.avg_branch = ScoreMlp::init(channels, rng);
    p.max_branch = ScoreMlp::init(channels, rng);
    return p;
}

std::vector<Tensor*> DecomposerParams::tensors() {
    std::vector<Tensor*> out;
    for (ScoreMlp* m : {&avg_branch, &max_branch})
        for (auto& l : m->layers) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
        }
    return out;
}

PoolStats pool_stats(Var features, Var prototype) {
    if (features.value().shape() != prototype.value().shape())
        throw DimensionError("pool_stats: F and F' shapes differ");
    return PoolStats{ad::spatial_mean(features), ad::spatial_mean(prototype), ad::spatial_max(features),
                     ad::spatial_max(prototype)};
}

Var score_mlp(Binder& bind, const ScoreMlp& mlp, Var input) {
    Var h = ad::relu(apply(bind, mlp.layers[0], input));
    h = ad::relu(apply(bind, mlp.layers[1], h));
    return ad::sigmoid(apply(bind, mlp.layers[2], h));
}

std::pair<Var, Var> difference_scores(Binder& bind, const PoolStats& stats, const DecomposerParams& params) {
    Var alpha = score_mlp(bind, params.avg_branch, ad::sub(stats.f_avg, stats.fp_avg));
    Var beta = score_mlp(bind, params.max_branch, ad::sub(stats.f_max, stats.fp_max));
    return {alpha, beta};
}

std::pair<Var, Var> decompose(Var features, Var prototype, Var alpha, Var beta) {
    const std::size_t c = features.value().shape().back();
    if (alpha.value().size() != c || beta.value().size() != c)
        throw DimensionError("decompose: score vectors must have one entry per channel");
    Var w = ad::scale(ad::add(alpha, beta), 0.5);
    Var fp = ad::mul_channels(features, w);
    Var fs = ad::mul_channels(prototype, ad::one_minus(w));
    return {fp, fs};
}

DecomposedFeatures run_decomposer(Binder& bind, const DecomposerParams& params, Var features, Var prototype,
                                  const DecomposerAblation& ablation) {
    if (!ablation.use_avg_pool && !ablation.use_max_pool)
        throw ConfigError("decomposer needs at least one pooling route");
    const PoolStats stats = pool_stats(features, prototype);
    auto [alpha, beta] = difference_scores(bind, stats, params);
    if (!ablation.use_avg_pool) alpha = beta;
    if (!ablation.use_max_pool) beta = alpha;
    auto [fp, fs] = decompose(features, prototype, alpha, beta);
    return DecomposedFeatures{fp, fs, alpha, beta};
}

}  // namespace crc
