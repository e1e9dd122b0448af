#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tnet/errors.hpp"

namespace tnet {

// Dense rank-4 extents, (batch, channels, height, width), all >= 1.
struct Shape {
    int n{1};
    int c{1};
    int h{1};
    int w{1};

    bool operator==(const Shape&) const = default;

    std::int64_t elems() const {
        return static_cast<std::int64_t>(n) * c * h * w;
    }

    std::string str() const {
        return std::to_string(n) + "x" + std::to_string(c) + "x" +
               std::to_string(h) + "x" + std::to_string(w);
    }
};

inline Shape make_shape(int n, int c, int h, int w) {
    if (n < 1 || c < 1 || h < 1 || w < 1)
        throw ShapeError("shape extents must be >= 1, got " + Shape{n, c, h, w}.str());
    std::int64_t limit = std::numeric_limits<std::int64_t>::max();
    std::int64_t e = n;
    for (std::int64_t d : {static_cast<std::int64_t>(c), static_cast<std::int64_t>(h),
                           static_cast<std::int64_t>(w)}) {
        if (e > limit / d)
            throw ShapeError("shape element count overflows: " + Shape{n, c, h, w}.str());
        e *= d;
    }
    return Shape{n, c, h, w};
}

// Contiguous row-major (N, C, H, W) storage. Plain value type: copy/move give
// wholly independent tensors, safe to hand across threads.
template <typename T>
struct Tensor {
    Shape shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(s), data(static_cast<std::size_t>(s.elems()), T(0)) {}

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    std::int64_t offset(int n, int c, int h, int w) const {
        return ((static_cast<std::int64_t>(n) * shape.c + c) * shape.h + h) * shape.w + w;
    }

    T& at(int n, int c, int h, int w) { return data[static_cast<std::size_t>(offset(n, c, h, w))]; }
    const T& at(int n, int c, int h, int w) const {
        return data[static_cast<std::size_t>(offset(n, c, h, w))];
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    void resize(Shape s) {
        shape = s;
        data.assign(static_cast<std::size_t>(s.elems()), T(0));
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

template <typename T>
Tensor<T> zeros(Shape s) {
    return Tensor<T>(make_shape(s.n, s.c, s.h, s.w));
}

namespace detail {
template <typename T, typename F>
Tensor<T> binary_op(const Tensor<T>& a, const Tensor<T>& b, F f, const char* name) {
    if (!(a.shape == b.shape))
        throw ShapeError(std::string(name) + ": shape mismatch " + a.shape.str() + " vs " +
                         b.shape.str());
    Tensor<T> out(a.shape);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = f(a.data[i], b.data[i]);
    return out;
}
}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op(a, b, [](T x, T y) { return x + y; }, "add");
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op(a, b, [](T x, T y) { return x - y; }, "sub");
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op(a, b, [](T x, T y) { return x * y; }, "mul");
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
    Tensor<T> out(a.shape);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * s;
    return out;
}

template <typename T>
Tensor<T> max_with_zero(const Tensor<T>& a) {
    Tensor<T> out(a.shape);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] > T(0) ? a.data[i] : T(0);
    return out;
}

// Class decode for a (1, c, 1, 1) tensor; ties resolve to the lowest index.
template <typename T>
int argmax_channel(const Tensor<T>& t) {
    if (t.shape.n != 1 || t.shape.h != 1 || t.shape.w != 1)
        throw ShapeError("argmax_channel expects shape (1, c, 1, 1), got " + t.shape.str());
    int best = 0;
    for (int i = 1; i < t.shape.c; ++i)
        if (t.data[static_cast<std::size_t>(i)] > t.data[static_cast<std::size_t>(best)]) best = i;
    return best;
}

}  // namespace tnet
