#include "crc/model.hpp"

#include <cmath>

#include "crc/error.hpp"

namespace crc {

ExtractorParams ExtractorParams::init(const TrainConfig& config, Rng& rng) {
    ExtractorParams p;
    std::size_t cin = config.clip_length * config.input_channels;
    for (std::size_t i = 0; i < 5; ++i) {
        const std::size_t cout = i < 4 ? config.encoder_channels.at(i) : config.feature_channels;
        const std::size_t stride = i < config.encoder_downsample ? 2 : 1;
        p.layers[i] = ConvLayer::init(3, cin, cout, stride, 1, rng);
        cin = cout;
    }
    return p;
}

std::vector<Tensor*> ExtractorParams::tensors() {
    std::vector<Tensor*> out;
    for (auto& l : layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

Var extract(Binder& bind, const ExtractorParams& params, Var clip) {
    const Tensor& x = clip.value();
    if (x.rank() != 3 || x.dim(2) != params.layers[0].weight.dim(2))
        throw DimensionError("extract: clip " + shape_string(x.shape()) + " does not match the extractor input");
    std::size_t div = 1;
    for (const auto& l : params.layers) div *= l.stride;
    if (x.dim(0) % div != 0 || x.dim(1) % div != 0)
        throw ConfigError("extract: frame size " + std::to_string(x.dim(0)) + "x" + std::to_string(x.dim(1)) +
                          " is not divisible by " + std::to_string(div));
    Var h = clip;
    for (const auto& l : params.layers) h = ad::relu(apply(bind, l, h));
    return h;
}

Model Model::init(const TrainConfig& config, Rng& rng) {
    config.validate();
    Model m;
    m.extractor = ExtractorParams::init(config, rng);
    m.decomposer = DecomposerParams::init(config.feature_channels, rng);
    m.cic = CiCParams::init(config.feature_channels, config.cic_width, config.factors, rng);
    m.memory = MemoryPool::init(config.feature_channels, config.memory_entries, rng);
    return m;
}

std::vector<Tensor*> Model::parameters() {
    std::vector<Tensor*> out = extractor.tensors();
    for (auto* t : decomposer.tensors()) out.push_back(t);
    for (auto* t : cic.tensors()) out.push_back(t);
    return out;
}

std::vector<const Tensor*> Model::parameters() const {
    auto mut = const_cast<Model*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

Tensor standardize(const Tensor& clip) {
    double mean = 0.0;
    for (double v : clip.values()) mean += v;
    mean /= static_cast<double>(clip.size());
    double var = 0.0;
    for (double v : clip.values()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(clip.size());
    const double inv = var > 1e-12 ? 1.0 / std::sqrt(var) : 0.0;
    Tensor out(clip.shape());
    for (std::size_t i = 0; i < clip.size(); ++i) out[i] = (clip[i] - mean) * inv;
    return out;
}

ClipForward forward_clip(Binder& bind, const Model& model, const TrainConfig& config, const Tensor& clip) {
    Tape& tape = bind.tape();
    ClipForward out;
    out.features = extract(bind, model.extractor,
                           tape.constant(config.standardize_clips ? standardize(clip) : clip));
    Var memory = tape.constant(model.memory.items);
    out.prototype = read(memory, out.features);
    const DecomposerAblation ablation{config.use_avg_pool, config.use_max_pool};
    out.parts = run_decomposer(bind, model.decomposer, out.features, out.prototype, ablation);
    out.shared_repr = characterize_one(bind, model.cic, out.parts.shared_part);
    out.private_repr = characterize_one(bind, model.cic, out.parts.private_part);
    return out;
}

}  // namespace crc
