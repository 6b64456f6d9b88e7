#include "crc/characterizer.hpp"

#include "crc/error.hpp"

namespace crc {

CiCParams CiCParams::init(std::size_t channels, std::size_t width, std::size_t factors, Rng& rng) {
    if (factors < 2) throw ConfigError("characterizer needs at least 2 causal factors");
    CiCParams p;
    std::size_t cin = channels;
    for (auto& b : p.blocks) {
        b.conv_a = ConvLayer::init(3, cin, width, 2, 1, rng);
        b.conv_b = ConvLayer::init(3, width, width, 1, 1, rng);
        b.skip = ConvLayer::init(1, cin, width, 2, 0, rng);
        cin = width;
    }
    p.head = DenseLayer::init(width, factors, rng);
    return p;
}

std::vector<Tensor*> CiCParams::tensors() {
    std::vector<Tensor*> out;
    for (auto& b : blocks)
        for (ConvLayer* l : {&b.conv_a, &b.conv_b, &b.skip}) {
            out.push_back(&l->weight);
            out.push_back(&l->bias);
        }
    out.push_back(&head.weight);
    out.push_back(&head.bias);
    return out;
}

void validate_factor_count(std::size_t factors, std::size_t height, std::size_t width, std::size_t channels) {
    if (factors < 2) throw ConfigError("causal factor count n must be >= 2");
    if (4 * factors > height * width * channels)
        throw ConfigError("causal factor count n=" + std::to_string(factors) + " exceeds H*W*C/4 = " +
                          std::to_string(height * width * channels / 4));
}

Var characterize_one(Binder& bind, const CiCParams& params, Var features) {
    Var x = features;
    for (const auto& b : params.blocks) {
        Var h = ad::relu(apply(bind, b.conv_a, x));
        h = apply(bind, b.conv_b, h);
        x = ad::relu(ad::add(h, apply(bind, b.skip, x)));
    }
    return apply(bind, params.head, ad::spatial_mean(x));
}

Var characterize(Binder& bind, const CiCParams& params, const std::vector<Var>& features) {
    if (features.size() < 2) throw ConfigError("characterize needs a batch of at least 2 clips");
    std::vector<Var> rows;
    rows.reserve(features.size());
    for (const auto& f : features) {
        if (f.value().shape() != features.front().value().shape())
            throw DimensionError("characterize: feature maps in a batch must share a shape");
        rows.push_back(characterize_one(bind, params, f));
    }
    return ad::stack_rows(rows);
}

Var center_rows(Var r) {
    const std::size_t b = r.value().dim(0);
    Tensor h = Tensor::identity(b);
    for (double& x : h.storage()) x -= 1.0 / static_cast<double>(b);
    return ad::matmul(r.tape->constant(std::move(h)), r);
}

Tensor center_rows(const Tensor& r) {
    if (r.rank() != 2) throw DimensionError("center_rows expects a b x n matrix");
    const std::size_t b = r.dim(0), n = r.dim(1);
    Tensor out = r;
    for (std::size_t j = 0; j < n; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < b; ++i) m += r.at(i, j);
        m /= static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i) out.at(i, j) -= m;
    }
    return out;
}

CorrelationSet correlation_matrices(Var shared_repr, Var private_repr) {
    return CorrelationSet{ad::column_cosine(shared_repr, private_repr), ad::column_cosine(shared_repr, shared_repr),
                          ad::column_cosine(private_repr, private_repr)};
}

Var consistency_loss(const CorrelationSet& corr, double lambda, const ConsistencyTerms& terms) {
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    const Tensor eye = Tensor::identity(corr.c1.value().dim(0));
    Tape& tape = *corr.c1.tape;
    Var total = tape.constant(Tensor::scalar(0.0));
    if (terms.use_c1) total = ad::add(total, ad::scale(ad::fro_sq_diff(corr.c1, eye), lambda));
    if (terms.use_c2) total = ad::add(total, ad::fro_sq_diff(corr.c2, eye));
    if (terms.use_c3) total = ad::add(total, ad::fro_sq_diff(corr.c3, eye));
    return total;
}

Tensor correlation_matrix(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || a.shape() != b.shape()) throw DimensionError("correlation_matrix: shape mismatch");
    return matmul(l2_normalize(a, 0).transposed(), l2_normalize(b, 0));
}

double consistency_loss(const Tensor& c1, const Tensor& c2, const Tensor& c3, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    const Tensor eye = Tensor::identity(c1.dim(0));
    return lambda * fro_sq_diff(c1, eye) + fro_sq_diff(c2, eye) + fro_sq_diff(c3, eye);
}

}  // namespace crc
