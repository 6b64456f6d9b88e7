#include "crc/memory.hpp"

#include <cmath>
#include <limits>

#include "crc/error.hpp"

namespace crc {
namespace {

void check_features(const Tensor& memory, const Tensor& features) {
    if (features.rank() != 3) throw DimensionError("memory: features must be H x W x C, got " +
                                                   shape_string(features.shape()));
    if (memory.rank() != 2 || memory.dim(0) != features.dim(2))
        throw DimensionError("memory: channel mismatch between pool " + shape_string(memory.shape()) +
                             " and features " + shape_string(features.shape()));
}

}  // namespace

MemoryPool MemoryPool::init(std::size_t channels, std::size_t entries, Rng& rng) {
    if (channels == 0 || entries == 0) throw ConfigError("memory pool needs C >= 1 and N >= 1");
    Tensor m({channels, entries});
    for (auto& v : m.values()) v = rng.uniform(-1.0, 1.0);
    return MemoryPool{l2_normalize(m, 0)};
}

Tensor expand(const Tensor& features) {
    if (features.rank() != 3) throw DimensionError("expand expects H x W x C");
    const std::size_t hw = features.dim(0) * features.dim(1);
    return features.reshaped({hw, features.dim(2)}).transposed();
}

Tensor unexpand(const Tensor& expanded, std::size_t height, std::size_t width) {
    if (expanded.rank() != 2 || expanded.dim(1) != height * width)
        throw DimensionError("unexpand: " + shape_string(expanded.shape()) + " does not hold " +
                             std::to_string(height) + "x" + std::to_string(width) + " locations");
    return expanded.transposed().reshaped({height, width, expanded.dim(0)});
}

Tensor read_weights(const MemoryPool& pool, const Tensor& features) {
    check_features(pool.items, features);
    const std::size_t hw = features.dim(0) * features.dim(1);
    Tensor scores = matmul(features.reshaped({hw, features.dim(2)}), pool.items);
    const double s = 1.0 / std::sqrt(static_cast<double>(pool.channels()));
    for (auto& v : scores.values()) v *= s;
    return softmax(scores, 1);
}

Tensor read(const MemoryPool& pool, const Tensor& features) {
    const Tensor weights = read_weights(pool, features);
    return matmul(weights, pool.items.transposed()).reshaped(features.shape());
}

Var read(Var memory, Var features) {
    const Tensor& f = features.value();
    check_features(memory.value(), f);
    const std::size_t hw = f.dim(0) * f.dim(1), c = f.dim(2);
    Var queries = ad::reshape(features, {hw, c});
    Var scores = ad::scale(ad::matmul(queries, memory), 1.0 / std::sqrt(static_cast<double>(c)));
    Var weights = ad::softmax(scores, 1);
    return ad::reshape(ad::matmul(weights, ad::transpose(memory)), f.shape());
}

MemoryPool write(const MemoryPool& pool, const Tensor& features) {
    return write(pool, std::span<const Tensor>(&features, 1));
}

MemoryPool write(const MemoryPool& pool, std::span<const Tensor> features) {
    if (features.empty()) return pool;
    const std::size_t c = pool.channels(), n = pool.entries();
    std::size_t total = 0;
    for (const auto& f : features) {
        check_features(pool.items, f);
        total += f.dim(0) * f.dim(1);
    }
    // Keys/values: every spatial location of every map, as rows (total x C).
    Tensor keys({total, c});
    std::size_t row = 0;
    for (const auto& f : features) {
        std::copy(f.values().begin(), f.values().end(), keys.data() + row * c);
        row += f.dim(0) * f.dim(1);
    }
    Tensor scores = matmul(keys, pool.items);  // total x N
    const double s = 1.0 / std::sqrt(static_cast<double>(c));
    for (auto& v : scores.values()) v *= s;
    const Tensor attn = softmax(scores, 0);  // per entry over locations
    Tensor updated = pool.items;
    for (std::size_t l = 0; l < total; ++l)
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double kv = keys.at(l, ch);
            for (std::size_t e = 0; e < n; ++e) updated.at(ch, e) += kv * attn.at(l, e);
        }
    return MemoryPool{l2_normalize(updated, 0)};
}

NearestEntries nearest_entries(const Tensor& memory, const Tensor& features) {
    check_features(memory, features);
    const std::size_t hw = features.dim(0) * features.dim(1), c = features.dim(2), n = memory.dim(1);
    NearestEntries out;
    out.first.resize(hw);
    out.second.resize(hw);
    std::vector<double> column(c);
    for (std::size_t q = 0; q < hw; ++q) {
        const double* qv = features.data() + q * c;
        double best = std::numeric_limits<double>::infinity(), next = best;
        std::size_t bi = 0, si = 0;
        for (std::size_t e = 0; e < n; ++e) {
            double d = 0.0;
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double diff = qv[ch] - memory.at(ch, e);
                d += diff * diff;
            }
            if (d < best) {
                next = best;
                si = bi;
                best = d;
                bi = e;
            } else if (d < next) {
                next = d;
                si = e;
            }
        }
        out.first[q] = bi;
        out.second[q] = n > 1 ? si : bi;
    }
    return out;
}

namespace {

// Per-query squared distance to a selected entry: [H*W]
Var distance_to(Var memory, Var features, std::vector<std::size_t> idx) {
    const Tensor& f = features.value();
    const std::size_t hw = f.dim(0) * f.dim(1), c = f.dim(2);
    Var queries = ad::reshape(features, {hw, c});
    Var chosen = ad::gather_rows(ad::transpose(memory), std::move(idx));
    return ad::sum_last(ad::square(ad::sub(queries, chosen)));
}

}  // namespace

Var compactness_loss(Var memory, Var features) {
    auto nearest = nearest_entries(memory.value(), features.value());
    return ad::mean(distance_to(memory, features, std::move(nearest.first)));
}

double compactness_loss(const MemoryPool& pool, const Tensor& features) {
    Tape tape;
    return compactness_loss(tape.constant(pool.items), tape.constant(features)).value()[0];
}

Var separateness_loss(Var memory, Var features, double margin) {
    if (memory.value().dim(1) < 2) throw ConfigError("separateness loss needs at least 2 memory entries");
    auto nearest = nearest_entries(memory.value(), features.value());
    Var d1 = distance_to(memory, features, std::move(nearest.first));
    Var d2 = distance_to(memory, features, std::move(nearest.second));
    return ad::mean(ad::relu(ad::add_scalar(ad::sub(d1, d2), margin)));
}

double separateness_loss(const MemoryPool& pool, const Tensor& features, double margin) {
    Tape tape;
    return separateness_loss(tape.constant(pool.items), tape.constant(features), margin).value()[0];
}

}  // namespace crc
