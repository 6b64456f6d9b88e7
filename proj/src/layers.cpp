#include "crc/layers.hpp"

#include <cmath>

namespace crc {

ConvLayer ConvLayer::init(std::size_t kernel, std::size_t cin, std::size_t cout, std::size_t stride,
                          std::size_t pad, Rng& rng) {
    ConvLayer l;
    l.weight = Tensor({kernel, kernel, cin, cout});
    const double bound = std::sqrt(6.0 / static_cast<double>(kernel * kernel * cin));
    for (auto& v : l.weight.values()) v = rng.uniform(-bound, bound);
    l.bias = Tensor({cout}, 0.0);
    l.stride = stride;
    l.pad = pad;
    return l;
}

DenseLayer DenseLayer::init(std::size_t in, std::size_t out, Rng& rng, bool zero_bias) {
    DenseLayer l;
    l.weight = Tensor({in, out});
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    for (auto& v : l.weight.values()) v = rng.uniform(-bound, bound);
    l.bias = Tensor({out}, 0.0);
    if (!zero_bias) {
        const double bb = 1.0 / std::sqrt(static_cast<double>(in));
        for (auto& v : l.bias.values()) v = rng.uniform(-bb, bb);
    }
    return l;
}

Var Binder::operator()(const Tensor& param) {
    auto it = bound_.find(&param);
    if (it != bound_.end()) return it->second;
    const Var v = tape_->leaf(param, trainable_);
    bound_.emplace(&param, v);
    return v;
}

Tensor Binder::grad(const Tensor& param) const {
    auto it = bound_.find(&param);
    if (it == bound_.end()) return Tensor(param.shape(), 0.0);
    return tape_->grad(it->second);
}

Var apply(Binder& bind, const ConvLayer& layer, Var x) {
    return ad::conv2d(x, bind(layer.weight), bind(layer.bias), layer.stride, layer.pad);
}

Var apply(Binder& bind, const DenseLayer& layer, Var x) {
    const std::size_t n = x.value().size();
    Var row = ad::reshape(x, {1, n});
    Var y = ad::add_bias(ad::matmul(row, bind(layer.weight)), bind(layer.bias));
    return ad::reshape(y, {layer.bias.size()});
}

}  // namespace crc
