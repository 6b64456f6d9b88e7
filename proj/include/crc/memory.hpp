#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crc/autodiff.hpp"
#include "crc/random.hpp"

namespace crc {

// Prototype memory: C x N matrix whose columns are unit-norm entries.
struct MemoryPool {
    Tensor items;  // C x N

    static MemoryPool init(std::size_t channels, std::size_t entries, Rng& rng);

    std::size_t channels() const { return items.dim(0); }
    std::size_t entries() const { return items.dim(1); }
};

// H x W x C -> C x (H*W); column j is the channel vector at row-major location j.
Tensor expand(const Tensor& features);
// Inverse of expand.
Tensor unexpand(const Tensor& expanded, std::size_t height, std::size_t width);

// Read attention weights, (H*W) x N: softmax over entries per spatial query.
Tensor read_weights(const MemoryPool& pool, const Tensor& features);

// F' = M softmax(M^T e(F) / sqrt(C)), reshaped back to H x W x C.
Tensor read(const MemoryPool& pool, const Tensor& features);
Var read(Var memory, Var features);

// M' = l2_cols(M + e(F) softmax_locations(e(F)^T M / sqrt(C))). With several
// feature maps the locations of all of them form one attention set.
MemoryPool write(const MemoryPool& pool, const Tensor& features);
MemoryPool write(const MemoryPool& pool, std::span<const Tensor> features);

// Index of the nearest and second-nearest entry for every spatial query
// (squared Euclidean distance, ties to the lower index).
struct NearestEntries {
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
};
NearestEntries nearest_entries(const Tensor& memory, const Tensor& features);

// mean_q |q - m_first(q)|^2
Var compactness_loss(Var memory, Var features);
double compactness_loss(const MemoryPool& pool, const Tensor& features);

// mean_q max(0, |q - m_first|^2 - |q - m_second|^2 + margin); needs N >= 2.
Var separateness_loss(Var memory, Var features, double margin);
double separateness_loss(const MemoryPool& pool, const Tensor& features, double margin);

}  // namespace crc
