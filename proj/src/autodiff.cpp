#include "crc/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "crc/error.hpp"

namespace crc {

Var Tape::leaf(Tensor value, bool requires_grad) {
    nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, nullptr});
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    bool rg = false;
    for (const auto& in : inputs) {
        if (in.tape != this) throw Error("operands recorded on different tapes");
        rg = rg || nodes_[in.id].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), Tensor{}, rg, rg ? std::move(fn) : nullptr});
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
    bool rg = false;
    for (const auto& in : inputs) {
        if (in.tape != this) throw Error("operands recorded on different tapes");
        rg = rg || nodes_[in.id].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), Tensor{}, rg, rg ? std::move(fn) : nullptr});
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor* Tape::accum(std::uint32_t id) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return nullptr;
    if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
    return &n.grad;
}

Tensor Tape::grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.grad.empty()) return Tensor(n.value.shape(), 0.0);
    return n.grad;
}

void Tape::backward(Var out) {
    if (nodes_[out.id].value.size() != 1) throw DimensionError("backward needs a scalar output");
    for (auto& n : nodes_) n.grad = Tensor{};
    if (!nodes_[out.id].requires_grad) return;
    nodes_[out.id].grad = Tensor(nodes_[out.id].value.shape(), 1.0);
    for (std::size_t i = out.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.backward && !n.grad.empty()) n.backward(*this, static_cast<std::uint32_t>(i));
    }
}

namespace ad {
namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                             shape_string(b.shape()));
}

template <class F>
Var unary(Var a, F&& fwd, Tape::BackwardFn bwd) {
    const Tensor& x = a.value();
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
    return a.tape->record(std::move(y), {a}, std::move(bwd));
}

}  // namespace

Var add(Var a, Var b) {
    require_same(a.value(), b.value(), "add");
    Tensor y = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
    const auto ia = a.id, ib = b.id;
    return a.tape->record(std::move(y), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        for (auto id : {ia, ib})
            if (Tensor* ga = t.accum(id))
                for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    });
}

Var sub(Var a, Var b) {
    require_same(a.value(), b.value(), "sub");
    Tensor y = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
    const auto ia = a.id, ib = b.id;
    return a.tape->record(std::move(y), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* ga = t.accum(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        if (Tensor* gb = t.accum(ib))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    });
}

Var mul(Var a, Var b) {
    require_same(a.value(), b.value(), "mul");
    Tensor y = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
    const auto ia = a.id, ib = b.id;
    return a.tape->record(std::move(y), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& av = t.value(Var{&t, ia});
        const Tensor& bv = t.value(Var{&t, ib});
        if (Tensor* ga = t.accum(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
        if (Tensor* gb = t.accum(ib))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    });
}

Var scale(Var a, double s) {
    const auto ia = a.id;
    return unary(a, [s](double x) { return s * x; }, [ia, s](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* ga = t.accum(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += s * g[i];
    });
}

Var add_scalar(Var a, double s) {
    const auto ia = a.id;
    return unary(a, [s](double x) { return x + s; }, [ia](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* ga = t.accum(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    });
}

Var one_minus(Var a) { return add_scalar(scale(a, -1.0), 1.0); }

Var square(Var a) {
    const auto ia = a.id;
    return unary(a, [](double x) { return x * x; }, [ia](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& x = t.value(Var{&t, ia});
        if (Tensor* ga = t.accum(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += 2.0 * x[i] * g[i];
    });
}

// Logits are clamped to +-36 so the output stays strictly inside (0, 1).
// The clamped region is flat, so it passes no gradient.
Var sigmoid(Var a) {
    const auto ia = a.id;
    return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-std::clamp(x, -36.0, 36.0))); },
                 [ia](Tape& t, std::uint32_t self) {
                     const Tensor& g = t.grad_of(self);
                     const Tensor& x = t.value(Var{&t, ia});
                     const Tensor& y = t.value(Var{&t, self});
                     if (Tensor* ga = t.accum(ia))
                         for (std::size_t i = 0; i < g.size(); ++i)
                             if (std::abs(x[i]) < 36.0) (*ga)[i] += g[i] * y[i] * (1.0 - y[i]);
                 });
}

Var relu(Var a) {
    const auto ia = a.id;
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [ia](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& x = t.value(Var{&t, ia});
        if (Tensor* ga = t.accum(ia))
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x[i] > 0.0) (*ga)[i] += g[i];
    });
}

Var sum(Var a) {
    double s = 0.0;
    for (double v : a.value().values()) s += v;
    const auto ia = a.id;
    return a.tape->record(Tensor::scalar(s), {a}, [ia](Tape& t, std::uint32_t self) {
        const double g = t.grad_of(self)[0];
        if (Tensor* ga = t.accum(ia))
            for (auto& v : ga->values()) v += g;
    });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var sum_last(Var a) {
    const Tensor& x = a.value();
    if (x.rank() < 2) return sum(a);
    const std::size_t k = x.shape().back();
    Shape out_shape(x.shape().begin(), x.shape().end() - 1);
    Tensor y(out_shape);
    for (std::size_t r = 0; r < y.size(); ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += x[r * k + j];
        y[r] = s;
    }
    const auto ia = a.id;
    return a.tape->record(std::move(y), {a}, [ia, k](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* ga = t.accum(ia))
            for (std::size_t r = 0; r < g.size(); ++r)
                for (std::size_t j = 0; j < k; ++j) (*ga)[r * k + j] += g[r];
    });
}

Var matmul(Var a, Var b) {
    Tensor y = crc::matmul(a.value(), b.value());
    const auto ia = a.id, ib = b.id;
    return a.tape->record(std::move(y), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);  // m x p
        const Tensor& av = t.value(Var{&t, ia});
        const Tensor& bv = t.value(Var{&t, ib});
        const std::size_t m = av.dim(0), k = av.dim(1), p = bv.dim(1);
        if (Tensor* ga = t.accum(ia)) {
            // dA = dC . B^T
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t s = 0; s < k; ++s) {
                    const double* grow = g.data() + i * p;
                    const double* brow = bv.data() + s * p;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < p; ++j) acc += grow[j] * brow[j];
                    ga->at(i, s) += acc;
                }
        }
        if (Tensor* gb = t.accum(ib)) {
            // dB = A^T . dC
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t s = 0; s < k; ++s) {
                    const double av_is = av.at(i, s);
                    const double* grow = g.data() + i * p;
                    double* gbrow = gb->data() + s * p;
                    for (std::size_t j = 0; j < p; ++j) gbrow[j] += av_is * grow[j];
                }
        }
    });
}

Var transpose(Var a) {
    Tensor y = a.value().transposed();
    const auto ia = a.id;
    return a.tape->record(std::move(y), {a}, [ia](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* ga = t.accum(ia)) {
            const std::size_t r = ga->dim(0), c = ga->dim(1);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) ga->at(i, j) += g.at(j, i);
        }
    });
}

Var reshape(Var a, Shape shape) {
    Tensor y = a.value().reshaped(std::move(shape));
    const auto ia = a.id;
    return a.tape->record(std::move(y), {a}, [ia](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* ga = t.accum(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    });
}

namespace {

struct Strided {
    std::size_t outer = 1, len = 1, inner = 1;
};

Strided strided(const Shape& shape, std::size_t axis) {
    if (axis >= shape.size()) throw DimensionError("axis out of range for " + shape_string(shape));
    Strided s;
    for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
    s.len = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
    return s;
}

}  // namespace

Var softmax(Var a, std::size_t axis) {
    Tensor y = crc::softmax(a.value(), axis);
    const Strided s = strided(a.value().shape(), axis);
    const auto ia = a.id;
    return a.tape->record(std::move(y), {a}, [ia, s](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& y = t.value(Var{&t, self});
        Tensor* ga = t.accum(ia);
        if (!ga) return;
        for (std::size_t o = 0; o < s.outer; ++o)
            for (std::size_t in = 0; in < s.inner; ++in) {
                const std::size_t base = o * s.len * s.inner + in;
                double dotv = 0.0;
                for (std::size_t k = 0; k < s.len; ++k) dotv += y[base + k * s.inner] * g[base + k * s.inner];
                for (std::size_t k = 0; k < s.len; ++k) {
                    const std::size_t idx = base + k * s.inner;
                    (*ga)[idx] += y[idx] * (g[idx] - dotv);
                }
            }
    });
}

Var l2_normalize(Var a, std::size_t axis) {
    Tensor y = crc::l2_normalize(a.value(), axis);
    const Strided s = strided(a.value().shape(), axis);
    const auto ia = a.id;
    return a.tape->record(std::move(y), {a}, [ia, s](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& y = t.value(Var{&t, self});
        const Tensor& x = t.value(Var{&t, ia});
        Tensor* ga = t.accum(ia);
        if (!ga) return;
        for (std::size_t o = 0; o < s.outer; ++o)
            for (std::size_t in = 0; in < s.inner; ++in) {
                const std::size_t base = o * s.len * s.inner + in;
                double ss = 0.0, yg = 0.0;
                for (std::size_t k = 0; k < s.len; ++k) {
                    const std::size_t idx = base + k * s.inner;
                    ss += x[idx] * x[idx];
                    yg += y[idx] * g[idx];
                }
                const double n = std::sqrt(ss);
                if (n < kNormEpsilon) continue;
                for (std::size_t k = 0; k < s.len; ++k) {
                    const std::size_t idx = base + k * s.inner;
                    (*ga)[idx] += (g[idx] - y[idx] * yg) / n;
                }
            }
    });
}

Var add_bias(Var x, Var bias) {
    const Tensor& xv = x.value();
    const Tensor& bv = bias.value();
    const std::size_t c = bv.size();
    if (bv.rank() != 1 || xv.shape().back() != c)
        throw DimensionError("add_bias: " + shape_string(xv.shape()) + " + " + shape_string(bv.shape()));
    Tensor y = xv;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i % c];
    const auto ix = x.id, ib = bias.id;
    return x.tape->record(std::move(y), {x, bias}, [ix, ib, c](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* gx = t.accum(ix))
            for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
        if (Tensor* gb = t.accum(ib))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % c] += g[i];
    });
}

Var mul_channels(Var x, Var v) {
    const Tensor& xv = x.value();
    const Tensor& vv = v.value();
    const std::size_t c = vv.size();
    if (vv.rank() != 1 || xv.shape().back() != c)
        throw DimensionError("mul_channels: " + shape_string(xv.shape()) + " * " + shape_string(vv.shape()));
    Tensor y = xv;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= vv[i % c];
    const auto ix = x.id, iv = v.id;
    return x.tape->record(std::move(y), {x, v}, [ix, iv, c](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& xv = t.value(Var{&t, ix});
        const Tensor& vv = t.value(Var{&t, iv});
        if (Tensor* gx = t.accum(ix))
            for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * vv[i % c];
        if (Tensor* gv = t.accum(iv))
            for (std::size_t i = 0; i < g.size(); ++i) (*gv)[i % c] += g[i] * xv[i];
    });
}

Var spatial_mean(Var x) {
    const Tensor& xv = x.value();
    if (xv.rank() != 3) throw DimensionError("spatial_mean expects H x W x C");
    const std::size_t c = xv.dim(2), hw = xv.dim(0) * xv.dim(1);
    Tensor y({c});
    for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t k = 0; k < c; ++k) y[k] += xv[p * c + k];
    for (std::size_t k = 0; k < c; ++k) y[k] /= static_cast<double>(hw);
    const auto ix = x.id;
    return x.tape->record(std::move(y), {x}, [ix, c, hw](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* gx = t.accum(ix))
            for (std::size_t p = 0; p < hw; ++p)
                for (std::size_t k = 0; k < c; ++k) (*gx)[p * c + k] += g[k] / static_cast<double>(hw);
    });
}

Var spatial_max(Var x) {
    const Tensor& xv = x.value();
    if (xv.rank() != 3) throw DimensionError("spatial_max expects H x W x C");
    const std::size_t c = xv.dim(2), hw = xv.dim(0) * xv.dim(1);
    Tensor y({c});
    std::vector<std::size_t> arg(c, 0);
    for (std::size_t k = 0; k < c; ++k) y[k] = xv[k];
    for (std::size_t p = 1; p < hw; ++p)
        for (std::size_t k = 0; k < c; ++k)
            if (xv[p * c + k] > y[k]) {
                y[k] = xv[p * c + k];
                arg[k] = p;
            }
    const auto ix = x.id;
    return x.tape->record(std::move(y), {x}, [ix, c, arg = std::move(arg)](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* gx = t.accum(ix))
            for (std::size_t k = 0; k < c; ++k) (*gx)[arg[k] * c + k] += g[k];
    });
}

Var conv2d(Var x, Var weight, Var bias, std::size_t stride, std::size_t pad) {
    const Tensor& xv = x.value();
    const Tensor& wv = weight.value();
    const Tensor& bv = bias.value();
    if (xv.rank() != 3 || wv.rank() != 4 || wv.dim(0) != wv.dim(1) || wv.dim(2) != xv.dim(2) ||
        bv.rank() != 1 || bv.dim(0) != wv.dim(3) || stride == 0)
        throw DimensionError("conv2d: input " + shape_string(xv.shape()) + ", weight " +
                             shape_string(wv.shape()) + ", bias " + shape_string(bv.shape()));
    const std::size_t h = xv.dim(0), w = xv.dim(1), cin = xv.dim(2);
    const std::size_t k = wv.dim(0), cout = wv.dim(3);
    if (h + 2 * pad < k || w + 2 * pad < k) throw DimensionError("conv2d: kernel larger than padded input");
    const std::size_t oh = (h + 2 * pad - k) / stride + 1;
    const std::size_t ow = (w + 2 * pad - k) / stride + 1;
    Tensor y({oh, ow, cout});
    for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
            double* out = y.data() + (oy * ow + ox) * cout;
            for (std::size_t co = 0; co < cout; ++co) out[co] = bv[co];
            for (std::size_t ky = 0; ky < k; ++ky) {
                const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                if (iy < 0 || iy >= static_cast<long>(h)) continue;
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                    if (ix < 0 || ix >= static_cast<long>(w)) continue;
                    const double* in = xv.data() + (static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)) * cin;
                    const double* wk = wv.data() + (ky * k + kx) * cin * cout;
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        const double v = in[ci];
                        const double* wrow = wk + ci * cout;
                        for (std::size_t co = 0; co < cout; ++co) out[co] += v * wrow[co];
                    }
                }
            }
        }
    const auto ixv = x.id, iw = weight.id, ib = bias.id;
    return x.tape->record(std::move(y), {x, weight, bias},
                          [=](Tape& t, std::uint32_t self) {
                              const Tensor& g = t.grad_of(self);
                              const Tensor& xv = t.value(Var{&t, ixv});
                              const Tensor& wv = t.value(Var{&t, iw});
                              Tensor* gx = t.accum(ixv);
                              Tensor* gw = t.accum(iw);
                              Tensor* gb = t.accum(ib);
                              for (std::size_t oy = 0; oy < oh; ++oy)
                                  for (std::size_t ox = 0; ox < ow; ++ox) {
                                      const double* go = g.data() + (oy * ow + ox) * cout;
                                      if (gb)
                                          for (std::size_t co = 0; co < cout; ++co) (*gb)[co] += go[co];
                                      for (std::size_t ky = 0; ky < k; ++ky) {
                                          const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                                          if (iy < 0 || iy >= static_cast<long>(h)) continue;
                                          for (std::size_t kx = 0; kx < k; ++kx) {
                                              const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                                              if (ix < 0 || ix >= static_cast<long>(w)) continue;
                                              const std::size_t in_off =
                                                  (static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)) * cin;
                                              const std::size_t w_off = (ky * k + kx) * cin * cout;
                                              for (std::size_t ci = 0; ci < cin; ++ci) {
                                                  const double* wrow = wv.data() + w_off + ci * cout;
                                                  if (gx) {
                                                      double acc = 0.0;
                                                      for (std::size_t co = 0; co < cout; ++co) acc += wrow[co] * go[co];
                                                      (*gx)[in_off + ci] += acc;
                                                  }
                                                  if (gw) {
                                                      const double v = xv[in_off + ci];
                                                      double* gwrow = gw->data() + w_off + ci * cout;
                                                      for (std::size_t co = 0; co < cout; ++co) gwrow[co] += v * go[co];
                                                  }
                                              }
                                          }
                                      }
                                  }
                          });
}

Var gather_rows(Var x, std::vector<std::size_t> idx) {
    const Tensor& xv = x.value();
    if (xv.rank() != 2) throw DimensionError("gather_rows expects a matrix");
    const std::size_t c = xv.dim(1);
    if (idx.empty()) throw DimensionError("gather_rows with no indices");
    Tensor y({idx.size(), c});
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= xv.dim(0)) throw DimensionError("gather_rows index out of range");
        for (std::size_t j = 0; j < c; ++j) y.at(r, j) = xv.at(idx[r], j);
    }
    const auto ix = x.id;
    return x.tape->record(std::move(y), {x}, [ix, c, idx = std::move(idx)](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        if (Tensor* gx = t.accum(ix))
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (std::size_t j = 0; j < c; ++j) gx->at(idx[r], j) += g.at(r, j);
    });
}

Var stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw DimensionError("stack_rows of nothing");
    const std::size_t n = rows.front().value().size();
    Tensor y({rows.size(), n});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Tensor& v = rows[r].value();
        if (v.size() != n) throw DimensionError("stack_rows: ragged rows");
        std::copy(v.values().begin(), v.values().end(), y.data() + r * n);
    }
    std::vector<std::uint32_t> ids;
    ids.reserve(rows.size());
    for (const auto& r : rows) ids.push_back(r.id);
    return rows.front().tape->record(std::move(y), rows, [ids, n](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        for (std::size_t r = 0; r < ids.size(); ++r)
            if (Tensor* gr = t.accum(ids[r]))
                for (std::size_t j = 0; j < n; ++j) (*gr)[j] += g[r * n + j];
    });
}

Var column_cosine(Var a, Var c) {
    require_same(a.value(), c.value(), "column_cosine");
    if (a.value().rank() != 2) throw DimensionError("column_cosine expects b x n matrices");
    return matmul(transpose(l2_normalize(a, 0)), l2_normalize(c, 0));
}

Var fro_sq_diff(Var a, const Tensor& target) {
    require_same(a.value(), target, "fro_sq_diff");
    return sum(square(sub(a, a.tape->constant(target))));
}

}  // namespace ad
}  // namespace crc
