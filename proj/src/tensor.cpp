#include "crc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crc/error.hpp"

namespace crc {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    for (auto d : shape_)
        if (d == 0) throw DimensionError("tensor extents must be positive: " + shape_string(shape_));
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    for (auto d : shape_)
        if (d == 0) throw DimensionError("tensor extents must be positive: " + shape_string(shape_));
    if (shape_size(shape_) != data_.size())
        throw DimensionError("shape " + shape_string(shape_) + " does not match " +
                             std::to_string(data_.size()) + " values");
}

Tensor Tensor::vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("ragged matrix literal");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size())
        throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), data_);
}

Tensor Tensor::transposed() const {
    if (rank() != 2) throw DimensionError("transpose expects a matrix, got " + shape_string(shape_));
    const std::size_t r = shape_[0], c = shape_[1];
    Tensor t({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) t.at(j, i) = at(i, j);
    return t;
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw DimensionError("matmul " + shape_string(a.shape()) + " . " + shape_string(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
    Tensor c({m, p});
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c.data() + i * p;
        for (std::size_t t = 0; t < k; ++t) {
            const double av = a.at(i, t);
            const double* brow = b.data() + t * p;
            for (std::size_t j = 0; j < p; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot of unequal lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("distance of unequal lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

namespace {

struct AxisLayout {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisLayout layout_for(const Shape& shape, std::size_t axis) {
    if (axis >= shape.size())
        throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape));
    AxisLayout l;
    for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
    l.len = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
    return l;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
    const auto l = layout_for(x.shape(), axis);
    Tensor y(x.shape());
    for (std::size_t o = 0; o < l.outer; ++o) {
        for (std::size_t in = 0; in < l.inner; ++in) {
            const std::size_t base = o * l.len * l.inner + in;
            double mx = x[base];
            for (std::size_t k = 1; k < l.len; ++k) mx = std::max(mx, x[base + k * l.inner]);
            double total = 0.0;
            for (std::size_t k = 0; k < l.len; ++k) {
                const double e = std::exp(x[base + k * l.inner] - mx);
                y[base + k * l.inner] = e;
                total += e;
            }
            for (std::size_t k = 0; k < l.len; ++k) y[base + k * l.inner] /= total;
        }
    }
    return y;
}

Tensor l2_normalize(const Tensor& x, std::size_t axis) {
    const auto l = layout_for(x.shape(), axis);
    Tensor y(x.shape());
    for (std::size_t o = 0; o < l.outer; ++o) {
        for (std::size_t in = 0; in < l.inner; ++in) {
            const std::size_t base = o * l.len * l.inner + in;
            double ss = 0.0;
            for (std::size_t k = 0; k < l.len; ++k) ss += x[base + k * l.inner] * x[base + k * l.inner];
            const double n = std::sqrt(ss);
            if (n < kNormEpsilon) continue;
            for (std::size_t k = 0; k < l.len; ++k) y[base + k * l.inner] = x[base + k * l.inner] / n;
        }
    }
    return y;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("cosine_sim of unequal lengths");
    const double na = norm(a), nb = norm(b);
    if (na < kNormEpsilon || nb < kNormEpsilon) return 0.0;
    return dot(a, b) / (na * nb);
}

double fro_sq_diff(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || a.dim(0) != a.dim(1) || a.shape() != b.shape())
        throw DimensionError("fro_sq_diff expects equal square matrices");
    return squared_distance(a.values(), b.values());
}

}  // namespace crc
