#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tnet/defs.hpp"
#include "tnet/tensor.hpp"

// Forward and backward kernels for every primitive layer. All kernels are
// pure functions of their inputs plus an explicit output/cache argument and
// run single-threaded. Scalar type is a template parameter: float for
// storage and inference, double for finite-difference checking.

namespace tnet {

inline void conv_out_size(int h, int w, int kh, int kw, Pad pad, int& oh, int& ow) {
    if (pad == Pad::same) {
        oh = h;
        ow = w;
    } else {
        oh = h - kh + 1;
        ow = w - kw + 1;
        if (oh < 1 || ow < 1)
            throw ShapeError("valid-padded convolution needs input >= kernel, got " +
                             std::to_string(h) + "x" + std::to_string(w) + " with " +
                             std::to_string(kh) + "x" + std::to_string(kw));
    }
}

// y[n,o,i,j] = b[o] + sum_{c,u,v} w[o,c,u,v] * x_pad[n,c,i+u,j+v]
// same padding is symmetric; any extra pad goes to bottom/right.
template <typename T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Pad pad,
                    Tensor<T>& y) {
    const int kh = w.shape.h, kw = w.shape.w;
    const int in_ch = w.shape.c, out_ch = w.shape.n;
    if (x.shape.c != in_ch)
        throw ShapeError("conv2d: input has " + std::to_string(x.shape.c) +
                         " channels, weights expect " + std::to_string(in_ch));
    int oh = 0, ow = 0;
    conv_out_size(x.shape.h, x.shape.w, kh, kw, pad, oh, ow);
    const int pt = pad == Pad::same ? (kh - 1) / 2 : 0;
    const int pl = pad == Pad::same ? (kw - 1) / 2 : 0;
    y.resize(Shape{x.shape.n, out_ch, oh, ow});

    const int H = x.shape.h, W = x.shape.w;
    for (int n = 0; n < x.shape.n; ++n) {
        for (int o = 0; o < out_ch; ++o) {
            T* yp = &y.at(n, o, 0, 0);
            const T bias = b.data[static_cast<std::size_t>(o)];
            for (int i = 0; i < oh * ow; ++i) yp[i] = bias;
            for (int c = 0; c < in_ch; ++c) {
                const T* xp = &x.at(n, c, 0, 0);
                const T* wp = &w.at(o, c, 0, 0);
                for (int u = 0; u < kh; ++u) {
                    for (int v = 0; v < kw; ++v) {
                        const T wv = wp[u * kw + v];
                        const int i_lo = std::max(0, pt - u);
                        const int i_hi = std::min(oh, H + pt - u);
                        const int j_lo = std::max(0, pl - v);
                        const int j_hi = std::min(ow, W + pl - v);
                        for (int i = i_lo; i < i_hi; ++i) {
                            const T* xrow = xp + static_cast<std::int64_t>(i + u - pt) * W + (v - pl);
                            T* yrow = yp + static_cast<std::int64_t>(i) * ow;
                            for (int j = j_lo; j < j_hi; ++j) yrow[j] += wv * xrow[j];
                        }
                    }
                }
            }
        }
    }
}

// Exact gradients of the forward contract. dx may be skipped (nullptr) when
// the input is the network input. dw/db are overwritten, not accumulated.
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, Pad pad, const Tensor<T>& dy,
                     Tensor<T>* dx, Tensor<T>& dw, Tensor<T>& db) {
    const int kh = w.shape.h, kw = w.shape.w;
    const int in_ch = w.shape.c, out_ch = w.shape.n;
    int oh = 0, ow = 0;
    conv_out_size(x.shape.h, x.shape.w, kh, kw, pad, oh, ow);
    if (!(dy.shape == Shape{x.shape.n, out_ch, oh, ow}))
        throw ShapeError("conv2d_backward: dy shape " + dy.shape.str() + " does not match forward output");
    const int pt = pad == Pad::same ? (kh - 1) / 2 : 0;
    const int pl = pad == Pad::same ? (kw - 1) / 2 : 0;
    const int H = x.shape.h, W = x.shape.w;

    dw.resize(w.shape);
    db.resize(Shape{out_ch, 1, 1, 1});
    if (dx) dx->resize(x.shape);

    for (int n = 0; n < x.shape.n; ++n) {
        for (int o = 0; o < out_ch; ++o) {
            const T* dyp = &dy.at(n, o, 0, 0);
            T acc = T(0);
            for (int i = 0; i < oh * ow; ++i) acc += dyp[i];
            db.data[static_cast<std::size_t>(o)] += acc;
            for (int c = 0; c < in_ch; ++c) {
                const T* xp = &x.at(n, c, 0, 0);
                T* dwp = &dw.at(o, c, 0, 0);
                T* dxp = dx ? &dx->at(n, c, 0, 0) : nullptr;
                for (int u = 0; u < kh; ++u) {
                    for (int v = 0; v < kw; ++v) {
                        const int i_lo = std::max(0, pt - u);
                        const int i_hi = std::min(oh, H + pt - u);
                        const int j_lo = std::max(0, pl - v);
                        const int j_hi = std::min(ow, W + pl - v);
                        T grad = T(0);
                        const T wv = w.at(o, c, u, v);
                        for (int i = i_lo; i < i_hi; ++i) {
                            const T* xrow = xp + static_cast<std::int64_t>(i + u - pt) * W + (v - pl);
                            const T* dyrow = dyp + static_cast<std::int64_t>(i) * ow;
                            if (dxp) {
                                T* dxrow = dxp + static_cast<std::int64_t>(i + u - pt) * W + (v - pl);
                                for (int j = j_lo; j < j_hi; ++j) {
                                    grad += dyrow[j] * xrow[j];
                                    dxrow[j] += wv * dyrow[j];
                                }
                            } else {
                                for (int j = j_lo; j < j_hi; ++j) grad += dyrow[j] * xrow[j];
                            }
                        }
                        dwp[u * kw + v] += grad;
                    }
                }
            }
        }
    }
}

// Non-overlapping 2x2 pooling; odd trailing row/column is dropped. Switches
// record the cell-local argmax (row-major 0..3, first maximum wins).
template <typename T>
void maxpool2x2_forward(const Tensor<T>& x, Tensor<T>& y, std::vector<std::uint8_t>& switches) {
    const int oh = x.shape.h / 2, ow = x.shape.w / 2;
    if (oh < 1 || ow < 1)
        throw ShapeError("maxpool2x2: spatial extent " + std::to_string(x.shape.h) + "x" +
                         std::to_string(x.shape.w) + " too small");
    y.resize(Shape{x.shape.n, x.shape.c, oh, ow});
    switches.assign(static_cast<std::size_t>(y.size()), 0);
    std::size_t s = 0;
    for (int n = 0; n < x.shape.n; ++n) {
        for (int c = 0; c < x.shape.c; ++c) {
            const T* xp = &x.at(n, c, 0, 0);
            T* yp = &y.at(n, c, 0, 0);
            for (int i = 0; i < oh; ++i) {
                const T* r0 = xp + static_cast<std::int64_t>(2 * i) * x.shape.w;
                const T* r1 = r0 + x.shape.w;
                for (int j = 0; j < ow; ++j) {
                    const T cell[4] = {r0[2 * j], r0[2 * j + 1], r1[2 * j], r1[2 * j + 1]};
                    int best = 0;
                    for (int k = 1; k < 4; ++k)
                        if (cell[k] > cell[best]) best = k;
                    yp[i * ow + j] = cell[best];
                    switches[s++] = static_cast<std::uint8_t>(best);
                }
            }
        }
    }
}

template <typename T>
void maxpool2x2_backward(const std::vector<std::uint8_t>& switches, Shape x_shape,
                         const Tensor<T>& dy, Tensor<T>& dx) {
    const int oh = x_shape.h / 2, ow = x_shape.w / 2;
    if (!(dy.shape == Shape{x_shape.n, x_shape.c, oh, ow}) ||
        switches.size() != static_cast<std::size_t>(dy.size()))
        throw ShapeError("maxpool2x2_backward: switches do not match this forward call");
    dx.resize(x_shape);
    std::size_t s = 0;
    for (int n = 0; n < x_shape.n; ++n) {
        for (int c = 0; c < x_shape.c; ++c) {
            const T* dyp = &dy.at(n, c, 0, 0);
            T* dxp = &dx.at(n, c, 0, 0);
            for (int i = 0; i < oh; ++i) {
                for (int j = 0; j < ow; ++j) {
                    const int k = switches[s++];
                    dxp[static_cast<std::int64_t>(2 * i + k / 2) * x_shape.w + 2 * j + k % 2] +=
                        dyp[i * ow + j];
                }
            }
        }
    }
}

inline int bn_axis_len(Shape s, BnMode mode) {
    return mode == BnMode::width_axis ? s.w : s.c;
}

template <typename T>
struct BnCache {
    std::vector<T> mean;
    std::vector<T> invstd;
    Tensor<T> xhat;
};

namespace detail {
// Group index of element (n,c,h,w) under the normalization mode; statistics
// pool over all other axes.
template <typename T, typename F>
void bn_for_each(const Tensor<T>& x, BnMode mode, F&& f) {
    std::int64_t idx = 0;
    for (int n = 0; n < x.shape.n; ++n)
        for (int c = 0; c < x.shape.c; ++c)
            for (int h = 0; h < x.shape.h; ++h)
                for (int w = 0; w < x.shape.w; ++w, ++idx)
                    f(idx, mode == BnMode::width_axis ? w : c);
}
}  // namespace detail

template <typename T>
void batchnorm_forward_train(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                             BnMode mode, double eps, Tensor<T>& y, BnCache<T>& cache,
                             Tensor<T>* running_mean, Tensor<T>* running_var, double momentum) {
    const int len = bn_axis_len(x.shape, mode);
    if (gamma.size() != len || beta.size() != len)
        throw ShapeError("batchnorm: parameter length " + std::to_string(gamma.size()) +
                         " does not match axis length " + std::to_string(len));
    const std::int64_t m = x.size() / len;
    cache.mean.assign(static_cast<std::size_t>(len), T(0));
    cache.invstd.assign(static_cast<std::size_t>(len), T(0));
    std::vector<T> var(static_cast<std::size_t>(len), T(0));

    detail::bn_for_each(x, mode, [&](std::int64_t i, int g) {
        cache.mean[static_cast<std::size_t>(g)] += x.data[static_cast<std::size_t>(i)];
    });
    for (int g = 0; g < len; ++g) cache.mean[static_cast<std::size_t>(g)] /= static_cast<T>(m);
    detail::bn_for_each(x, mode, [&](std::int64_t i, int g) {
        T d = x.data[static_cast<std::size_t>(i)] - cache.mean[static_cast<std::size_t>(g)];
        var[static_cast<std::size_t>(g)] += d * d;
    });
    for (int g = 0; g < len; ++g) {
        var[static_cast<std::size_t>(g)] /= static_cast<T>(m);
        cache.invstd[static_cast<std::size_t>(g)] =
            T(1) / std::sqrt(var[static_cast<std::size_t>(g)] + static_cast<T>(eps));
    }

    y.resize(x.shape);
    cache.xhat.resize(x.shape);
    detail::bn_for_each(x, mode, [&](std::int64_t i, int g) {
        const std::size_t ii = static_cast<std::size_t>(i), gg = static_cast<std::size_t>(g);
        const T xh = (x.data[ii] - cache.mean[gg]) * cache.invstd[gg];
        cache.xhat.data[ii] = xh;
        y.data[ii] = gamma.data[gg] * xh + beta.data[gg];
    });

    if (running_mean && running_var) {
        for (int g = 0; g < len; ++g) {
            const std::size_t gg = static_cast<std::size_t>(g);
            running_mean->data[gg] = static_cast<T>(momentum) * running_mean->data[gg] +
                                     static_cast<T>(1 - momentum) * cache.mean[gg];
            running_var->data[gg] = static_cast<T>(momentum) * running_var->data[gg] +
                                    static_cast<T>(1 - momentum) * var[gg];
        }
    }
}

template <typename T>
void batchnorm_forward_infer(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                             const Tensor<T>& running_mean, const Tensor<T>& running_var,
                             BnMode mode, double eps, Tensor<T>& y) {
    const int len = bn_axis_len(x.shape, mode);
    if (gamma.size() != len || beta.size() != len)
        throw ShapeError("batchnorm: parameter length " + std::to_string(gamma.size()) +
                         " does not match axis length " + std::to_string(len));
    std::vector<T> scale(static_cast<std::size_t>(len)), shift(static_cast<std::size_t>(len));
    for (int g = 0; g < len; ++g) {
        const std::size_t gg = static_cast<std::size_t>(g);
        const T inv = T(1) / std::sqrt(running_var.data[gg] + static_cast<T>(eps));
        scale[gg] = gamma.data[gg] * inv;
        shift[gg] = beta.data[gg] - running_mean.data[gg] * scale[gg];
    }
    y.resize(x.shape);
    detail::bn_for_each(x, mode, [&](std::int64_t i, int g) {
        const std::size_t ii = static_cast<std::size_t>(i), gg = static_cast<std::size_t>(g);
        y.data[ii] = scale[gg] * x.data[ii] + shift[gg];
    });
}

// Gradients of the train-phase forward; requires the cache of that call.
template <typename T>
void batchnorm_backward(const Tensor<T>& gamma, const BnCache<T>& cache, BnMode mode,
                        const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dgamma, Tensor<T>& dbeta) {
    if (cache.xhat.size() != dy.size() || !(cache.xhat.shape == dy.shape))
        throw ShapeError("batchnorm_backward: no cached forward for this dy shape");
    const int len = bn_axis_len(dy.shape, mode);
    const std::int64_t m = dy.size() / len;
    dgamma.resize(Shape{len, 1, 1, 1});
    dbeta.resize(Shape{len, 1, 1, 1});
    dx.resize(dy.shape);

    std::vector<T> sum_dy(static_cast<std::size_t>(len), T(0));
    std::vector<T> sum_dy_xhat(static_cast<std::size_t>(len), T(0));
    detail::bn_for_each(dy, mode, [&](std::int64_t i, int g) {
        const std::size_t ii = static_cast<std::size_t>(i), gg = static_cast<std::size_t>(g);
        sum_dy[gg] += dy.data[ii];
        sum_dy_xhat[gg] += dy.data[ii] * cache.xhat.data[ii];
    });
    for (int g = 0; g < len; ++g) {
        const std::size_t gg = static_cast<std::size_t>(g);
        dbeta.data[gg] += sum_dy[gg];
        dgamma.data[gg] += sum_dy_xhat[gg];
    }
    detail::bn_for_each(dy, mode, [&](std::int64_t i, int g) {
        const std::size_t ii = static_cast<std::size_t>(i), gg = static_cast<std::size_t>(g);
        dx.data[ii] = gamma.data[gg] * cache.invstd[gg] / static_cast<T>(m) *
                      (static_cast<T>(m) * dy.data[ii] - sum_dy[gg] -
                       cache.xhat.data[ii] * sum_dy_xhat[gg]);
    });
}

template <typename T>
void relu_forward(const Tensor<T>& x, Tensor<T>& y) {
    y.resize(x.shape);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
}

// Gradient passes where x > 0 (strict: zero at the kink).
template <typename T>
void relu_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
    dx.resize(x.shape);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        dx.data[i] = x.data[i] > T(0) ? dy.data[i] : T(0);
}

template <typename T>
void global_avg_pool_forward(const Tensor<T>& x, Tensor<T>& y) {
    y.resize(Shape{x.shape.n, x.shape.c, 1, 1});
    const std::int64_t hw = static_cast<std::int64_t>(x.shape.h) * x.shape.w;
    for (int n = 0; n < x.shape.n; ++n) {
        for (int c = 0; c < x.shape.c; ++c) {
            const T* xp = &x.at(n, c, 0, 0);
            T acc = T(0);
            for (std::int64_t i = 0; i < hw; ++i) acc += xp[i];
            y.at(n, c, 0, 0) = acc / static_cast<T>(hw);
        }
    }
}

template <typename T>
void global_avg_pool_backward(Shape x_shape, const Tensor<T>& dy, Tensor<T>& dx) {
    dx.resize(x_shape);
    const std::int64_t hw = static_cast<std::int64_t>(x_shape.h) * x_shape.w;
    for (int n = 0; n < x_shape.n; ++n) {
        for (int c = 0; c < x_shape.c; ++c) {
            const T g = dy.at(n, c, 0, 0) / static_cast<T>(hw);
            T* dxp = &dx.at(n, c, 0, 0);
            for (std::int64_t i = 0; i < hw; ++i) dxp[i] = g;
        }
    }
}

// Max-subtracted exponent normalization over the channel axis of (N, c, 1, 1).
template <typename T>
void softmax_forward(const Tensor<T>& x, Tensor<T>& y) {
    if (x.shape.h != 1 || x.shape.w != 1)
        throw ShapeError("softmax expects spatially reduced input, got " + x.shape.str());
    y.resize(x.shape);
    for (int n = 0; n < x.shape.n; ++n) {
        const T* xp = &x.at(n, 0, 0, 0);
        T* yp = &y.at(n, 0, 0, 0);
        T mx = xp[0];
        for (int c = 1; c < x.shape.c; ++c) mx = std::max(mx, xp[c]);
        T sum = T(0);
        for (int c = 0; c < x.shape.c; ++c) {
            yp[c] = std::exp(xp[c] - mx);
            sum += yp[c];
        }
        for (int c = 0; c < x.shape.c; ++c) yp[c] /= sum;
    }
}

// Channel concatenation, a's channels first.
template <typename T>
void concat_channels_forward(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& y) {
    if (a.shape.n != b.shape.n || a.shape.h != b.shape.h || a.shape.w != b.shape.w)
        throw ShapeError("concat_channels: mismatched shapes " + a.shape.str() + " vs " +
                         b.shape.str());
    y.resize(Shape{a.shape.n, a.shape.c + b.shape.c, a.shape.h, a.shape.w});
    const std::int64_t hw = static_cast<std::int64_t>(a.shape.h) * a.shape.w;
    for (int n = 0; n < a.shape.n; ++n) {
        std::copy_n(&a.at(n, 0, 0, 0), a.shape.c * hw, &y.at(n, 0, 0, 0));
        std::copy_n(&b.at(n, 0, 0, 0), b.shape.c * hw, &y.at(n, a.shape.c, 0, 0));
    }
}

template <typename T>
void concat_channels_backward(const Tensor<T>& dy, int c_a, Tensor<T>& da, Tensor<T>& db) {
    const int c_b = dy.shape.c - c_a;
    da.resize(Shape{dy.shape.n, c_a, dy.shape.h, dy.shape.w});
    db.resize(Shape{dy.shape.n, c_b, dy.shape.h, dy.shape.w});
    const std::int64_t hw = static_cast<std::int64_t>(dy.shape.h) * dy.shape.w;
    for (int n = 0; n < dy.shape.n; ++n) {
        std::copy_n(&dy.at(n, 0, 0, 0), c_a * hw, &da.at(n, 0, 0, 0));
        std::copy_n(&dy.at(n, c_a, 0, 0), c_b * hw, &db.at(n, 0, 0, 0));
    }
}

// Affine map on (N, in, 1, 1) inputs; weights are (out, in) row-major.
template <typename T>
void dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y) {
    const int in = w.shape.c, out = w.shape.n;
    if (x.shape.c != in || x.shape.h != 1 || x.shape.w != 1)
        throw ShapeError("dense: input " + x.shape.str() + " does not match weight in=" +
                         std::to_string(in));
    y.resize(Shape{x.shape.n, out, 1, 1});
    for (int n = 0; n < x.shape.n; ++n) {
        const T* xp = &x.at(n, 0, 0, 0);
        T* yp = &y.at(n, 0, 0, 0);
        for (int o = 0; o < out; ++o) {
            const T* wp = &w.at(o, 0, 0, 0);
            T acc = b.data[static_cast<std::size_t>(o)];
            for (int i = 0; i < in; ++i) acc += wp[i] * xp[i];
            yp[o] = acc;
        }
    }
}

template <typename T>
void dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                    Tensor<T>& dw, Tensor<T>& db) {
    const int in = w.shape.c, out = w.shape.n;
    dw.resize(w.shape);
    db.resize(Shape{out, 1, 1, 1});
    if (dx) dx->resize(x.shape);
    for (int n = 0; n < x.shape.n; ++n) {
        const T* xp = &x.at(n, 0, 0, 0);
        const T* dyp = &dy.at(n, 0, 0, 0);
        T* dxp = dx ? &dx->at(n, 0, 0, 0) : nullptr;
        for (int o = 0; o < out; ++o) {
            const T g = dyp[o];
            db.data[static_cast<std::size_t>(o)] += g;
            const T* wp = &w.at(o, 0, 0, 0);
            T* dwp = &dw.at(o, 0, 0, 0);
            if (dxp) {
                for (int i = 0; i < in; ++i) {
                    dwp[i] += g * xp[i];
                    dxp[i] += g * wp[i];
                }
            } else {
                for (int i = 0; i < in; ++i) dwp[i] += g * xp[i];
            }
        }
    }
}

}  // namespace tnet
