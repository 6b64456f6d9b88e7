#pragma once

#include <array>
#include <optional>
#include <vector>

#include "crc/characterizer.hpp"
#include "crc/clustering.hpp"
#include "crc/config.hpp"
#include "crc/decomposer.hpp"
#include "crc/memory.hpp"

namespace crc {

// Five 3x3 conv layers with ReLU; the first `encoder_downsample` use stride 2.
struct ExtractorParams {
    std::array<ConvLayer, 5> layers;

    static ExtractorParams init(const TrainConfig& config, Rng& rng);
    std::vector<Tensor*> tensors();
};

// clip: H0 x W0 x (T*Cin) -> F: H x W x C
Var extract(Binder& bind, const ExtractorParams& params, Var clip);

struct Model {
    ExtractorParams extractor;
    DecomposerParams decomposer;
    CiCParams cic;
    MemoryPool memory;
    std::optional<ClusterModel> clusters;

    static Model init(const TrainConfig& config, Rng& rng);

    // Trainable tensors in a fixed order (extractor, decomposer, characterizer).
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
};

// Per-clip forward through extractor, memory read, decomposer and the
// characterizer (both branches).
struct ClipForward {
    Var features;   // F
    Var prototype;  // F'
    DecomposedFeatures parts;
    Var shared_repr;   // r from F_s, [n]
    Var private_repr;  // r~ from F_p, [n]
};

// Zero mean, unit variance over the whole clip; a constant clip maps to zeros.
Tensor standardize(const Tensor& clip);

ClipForward forward_clip(Binder& bind, const Model& model, const TrainConfig& config, const Tensor& clip);

}  // namespace crc
