#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "crc/autodiff.hpp"
#include "crc/random.hpp"

namespace crc {

struct ConvLayer {
    Tensor weight;  // K x K x Cin x Cout
    Tensor bias;    // Cout
    std::size_t stride = 1;
    std::size_t pad = 1;

    static ConvLayer init(std::size_t kernel, std::size_t cin, std::size_t cout, std::size_t stride,
                          std::size_t pad, Rng& rng);
};

struct DenseLayer {
    Tensor weight;  // in x out
    Tensor bias;    // out

    static DenseLayer init(std::size_t in, std::size_t out, Rng& rng, bool zero_bias = false);
};

// Registers parameter tensors as tape leaves, once per tensor per tape, so
// that the gradient of a shared parameter accumulates on a single node.
class Binder {
public:
    Binder(Tape& tape, bool trainable) : tape_(&tape), trainable_(trainable) {}

    Var operator()(const Tensor& param);
    // Makes later lookups of `param` return v instead of a fresh leaf.
    void bind(const Tensor& param, Var v) { bound_.insert_or_assign(&param, v); }
    Tape& tape() const { return *tape_; }

    // Gradient for a bound parameter; zeros when it was never bound.
    Tensor grad(const Tensor& param) const;

private:
    Tape* tape_;
    bool trainable_;
    std::map<const Tensor*, Var> bound_;
};

Var apply(Binder& bind, const ConvLayer& layer, Var x);
// x[n] -> [out]
Var apply(Binder& bind, const DenseLayer& layer, Var x);

}  // namespace crc
