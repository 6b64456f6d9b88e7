#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "crc/layers.hpp"

namespace crc {

struct ResidualBlock {
    ConvLayer conv_a;  // 3x3, stride 2
    ConvLayer conv_b;  // 3x3, stride 1
    ConvLayer skip;    // 1x1, stride 2
};

// Causality-inspired characterizer: residual conv encoder, global average
// pool, linear map to n causal factors. One instance serves both the
// shared and the private branch.
struct CiCParams {
    std::array<ResidualBlock, 3> blocks;
    DenseLayer head;

    static CiCParams init(std::size_t channels, std::size_t width, std::size_t factors, Rng& rng);
    std::size_t factors() const { return head.bias.size(); }
    std::vector<Tensor*> tensors();
};

// Throws ConfigError unless 2 <= n <= H*W*C/4.
void validate_factor_count(std::size_t factors, std::size_t height, std::size_t width, std::size_t channels);

// One feature map -> n-vector.
Var characterize_one(Binder& bind, const CiCParams& params, Var features);
// b >= 2 feature maps -> b x n
Var characterize(Binder& bind, const CiCParams& params, const std::vector<Var>& features);

// Subtracts each column's mean over the batch axis, so the column cosine
// becomes a Pearson correlation across the batch.
Var center_rows(Var r);
Tensor center_rows(const Tensor& r);

struct CorrelationSet {
    Var c1;  // R -> R~
    Var c2;  // R -> R
    Var c3;  // R~ -> R~
};

// Entry (i,j) is the cosine between factor columns i and j across the batch.
CorrelationSet correlation_matrices(Var shared_repr, Var private_repr);

struct ConsistencyTerms {
    bool use_c1 = true;
    bool use_c2 = true;
    bool use_c3 = true;
};

// lambda |C1 - I|_F^2 + |C2 - I|_F^2 + |C3 - I|_F^2, with switchable terms.
Var consistency_loss(const CorrelationSet& corr, double lambda, const ConsistencyTerms& terms = {});

// Plain-value counterparts used at inference time and by tests.
Tensor correlation_matrix(const Tensor& a, const Tensor& b);
double consistency_loss(const Tensor& c1, const Tensor& c2, const Tensor& c3, double lambda);

}  // namespace crc
