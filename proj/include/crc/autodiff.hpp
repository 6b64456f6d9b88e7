#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "crc/tensor.hpp"

namespace crc {

class Tape;

// Handle to a value recorded on a Tape.
struct Var {
    Tape* tape = nullptr;
    std::uint32_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
};

// Records primitive operations in execution order. backward() replays the
// records in reverse and accumulates gradients into every node that
// requires one. A Tape is single-threaded; separate tapes are independent.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

    // Gradient of the last backward() target w.r.t. v (zeros if v was unreachable).
    Tensor grad(Var v) const;

    // Seeds d(out)/d(out) = 1; out must hold a single element.
    void backward(Var out);

    std::size_t size() const noexcept { return nodes_.size(); }

    // Used by op implementations.
    using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;
    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
    Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn);
    const Tensor& grad_of(std::uint32_t id) const { return nodes_[id].grad; }
    // Gradient buffer of an input node, allocated on first use; nullptr if
    // the node does not need a gradient.
    Tensor* accum(std::uint32_t id);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        BackwardFn backward;
    };
    std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape->value(*this); }

// ---------------------------------------------------------------------------
// Differentiable primitives. Shapes are checked; mismatches throw DimensionError.
// ---------------------------------------------------------------------------
namespace ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var one_minus(Var a);
Var square(Var a);
Var sigmoid(Var a);
Var relu(Var a);

Var sum(Var a);   // -> [1]
Var mean(Var a);  // -> [1]
// Sum over the last axis: [..., k] -> [...]
Var sum_last(Var a);

Var matmul(Var a, Var b);  // [m x k] . [k x p]
Var transpose(Var a);      // 2-D
Var reshape(Var a, Shape shape);

Var softmax(Var a, std::size_t axis);
Var l2_normalize(Var a, std::size_t axis);

// Broadcasts over the last axis: x[..., C] (+|*) v[C]
Var add_bias(Var x, Var bias);
Var mul_channels(Var x, Var v);

// x[H x W x C] -> [C]
Var spatial_mean(Var x);
Var spatial_max(Var x);

// x[H x W x Cin], weight[K x K x Cin x Cout], bias[Cout], zero padding.
Var conv2d(Var x, Var weight, Var bias, std::size_t stride, std::size_t pad);

// Rows r of x[r x c] selected by index -> [idx.size() x c]
Var gather_rows(Var x, std::vector<std::size_t> idx);
// b vectors of length n -> [b x n]
Var stack_rows(const std::vector<Var>& rows);

// Column-wise cosine similarity of a[b x n] and c[b x n] -> [n x n]
// (entry (i,j) = cos(column i of a, column j of c)).
Var column_cosine(Var a, Var c);

// Sum of squared differences to a constant target of the same shape.
Var fro_sq_diff(Var a, const Tensor& target);

}  // namespace ad
}  // namespace crc
