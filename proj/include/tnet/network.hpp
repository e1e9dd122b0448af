#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tnet/layers.hpp"
#include "tnet/lowering.hpp"
#include "tnet/rng.hpp"
#include "tnet/tensor.hpp"

// Graph executor. Owns parameters, activation buffers and backward caches
// for every lowered node. Buffers persist across calls and are resized to
// the incoming batch, so steady-state runs do not allocate.
//
// Contract: backward_from_logits derives gradients of the most recent
// train-phase forward; the softmax node is skipped because the caller folds
// it into the cross-entropy gradient.

namespace tnet {

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.99;

template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* value = nullptr;
    Tensor<T>* grad = nullptr;  // null for running statistics
    bool trainable = false;
};

template <typename T>
class Network {
public:
    explicit Network(LoweredNet net) : net_(std::move(net)), st_(net_.nodes.size()) {
        for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
            const NodeDesc& nd = net_.nodes[i];
            NodeState& s = st_[i];
            switch (nd.op) {
                case Op::conv:
                    s.w.resize(Shape{nd.out_ch, nd.in_ch, nd.kh, nd.kw});
                    s.b.resize(Shape{nd.out_ch, 1, 1, 1});
                    break;
                case Op::dense:
                    s.w.resize(Shape{nd.out_features, nd.in_features, 1, 1});
                    s.b.resize(Shape{nd.out_features, 1, 1, 1});
                    break;
                case Op::bn:
                    s.gamma.resize(Shape{nd.bn_len, 1, 1, 1});
                    s.beta.resize(Shape{nd.bn_len, 1, 1, 1});
                    s.rmean.resize(Shape{nd.bn_len, 1, 1, 1});
                    s.rvar.resize(Shape{nd.bn_len, 1, 1, 1});
                    break;
                default:
                    break;
            }
        }
        reset_params();
    }

    const LoweredNet& lowered() const { return net_; }

    // Fresh start: fan-scaled uniform weights, zero biases and shifts, unit
    // scales and unit running variance. Draw order is node order, tensors
    // row-major, so a fixed seed reproduces parameters exactly.
    void init_params(Rng& rng) {
        reset_params();
        for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
            const NodeDesc& nd = net_.nodes[i];
            NodeState& s = st_[i];
            if (nd.op == Op::conv) {
                const double fan_in = static_cast<double>(nd.in_ch) * nd.kh * nd.kw;
                const double fan_out = static_cast<double>(nd.out_ch) * nd.kh * nd.kw;
                const double bound = std::sqrt(6.0 / (fan_in + fan_out));
                for (auto& v : s.w.data) v = static_cast<T>(rng.uniform(-bound, bound));
            } else if (nd.op == Op::dense) {
                const double bound =
                    std::sqrt(6.0 / (static_cast<double>(nd.in_features) + nd.out_features));
                for (auto& v : s.w.data) v = static_cast<T>(rng.uniform(-bound, bound));
            }
        }
    }

    std::vector<ParamRef<T>> params() {
        std::vector<ParamRef<T>> out;
        for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
            const NodeDesc& nd = net_.nodes[i];
            NodeState& s = st_[i];
            if (nd.op == Op::conv || nd.op == Op::dense) {
                out.push_back({nd.name + ".w", &s.w, &s.dw, true});
                out.push_back({nd.name + ".b", &s.b, &s.db, true});
            } else if (nd.op == Op::bn) {
                out.push_back({nd.name + ".gamma", &s.gamma, &s.dgamma, true});
                out.push_back({nd.name + ".beta", &s.beta, &s.dbeta, true});
                out.push_back({nd.name + ".rmean", &s.rmean, nullptr, false});
                out.push_back({nd.name + ".rvar", &s.rvar, nullptr, false});
            }
        }
        return out;
    }

    long long trainable_param_count() {
        long long n = 0;
        for (const auto& p : params())
            if (p.trainable) n += p.value->size();
        return n;
    }

    // update_stats only applies to the train phase; a pattern pointer makes
    // the pass record an activation-shape fingerprint (rectifier signs and
    // pooling switches), used to detect nondifferentiable crossings.
    const Tensor<T>& forward(const Tensor<T>& x, Phase phase, bool update_stats = false,
                             std::uint64_t* pattern = nullptr) {
        if (x.shape.c != net_.def.in_ch || x.shape.h != net_.def.in_h ||
            x.shape.w != net_.def.in_w)
            throw ShapeError("network input " + x.shape.str() + " does not match (N," +
                             std::to_string(net_.def.in_ch) + "," + std::to_string(net_.def.in_h) +
                             "," + std::to_string(net_.def.in_w) + ")");
        if (pattern) *pattern = 1469598103934665603ULL;
        for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
            const NodeDesc& nd = net_.nodes[i];
            NodeState& s = st_[i];
            switch (nd.op) {
                case Op::input:
                    s.value = x;
                    break;
                case Op::conv:
                    conv2d_forward(val(nd.inputs[0]), s.w, s.b, nd.pad, s.value);
                    break;
                case Op::bn:
                    if (phase == Phase::train)
                        batchnorm_forward_train(val(nd.inputs[0]), s.gamma, s.beta, nd.bn_mode,
                                                kBnEps, s.value, s.bn_cache,
                                                update_stats ? &s.rmean : nullptr,
                                                update_stats ? &s.rvar : nullptr, kBnMomentum);
                    else
                        batchnorm_forward_infer(val(nd.inputs[0]), s.gamma, s.beta, s.rmean,
                                                s.rvar, nd.bn_mode, kBnEps, s.value);
                    break;
                case Op::relu:
                    relu_forward(val(nd.inputs[0]), s.value);
                    if (pattern)
                        for (const T& v : val(nd.inputs[0]).data)
                            fnv(*pattern, v > T(0) ? 1 : 0);
                    break;
                case Op::maxpool:
                    maxpool2x2_forward(val(nd.inputs[0]), s.value, s.pool_switches);
                    if (pattern)
                        for (std::uint8_t sw : s.pool_switches) fnv(*pattern, sw);
                    break;
                case Op::gap:
                    global_avg_pool_forward(val(nd.inputs[0]), s.value);
                    break;
                case Op::softmax:
                    softmax_forward(val(nd.inputs[0]), s.value);
                    break;
                case Op::concat:
                    concat_channels_forward(val(nd.inputs[0]), val(nd.inputs[1]), s.value);
                    break;
                case Op::dense:
                    dense_forward(val(nd.inputs[0]), s.w, s.b, s.value);
                    break;
                case Op::flatten: {
                    const Tensor<T>& in = val(nd.inputs[0]);
                    s.value.resize(Shape{in.shape.n, nd.c, 1, 1});
                    s.value.data = in.data;
                    break;
                }
            }
        }
        return st_[static_cast<std::size_t>(net_.output_node)].value;
    }

    const Tensor<T>& node_value(int id) const { return st_[static_cast<std::size_t>(id)].value; }
    const Tensor<T>& logits() const {
        return st_[static_cast<std::size_t>(net_.logits_node)].value;
    }

    // dlogits is the loss gradient at the softmax input (the caller's fused
    // softmax/cross-entropy term). Parameter gradients are overwritten.
    void backward_from_logits(const Tensor<T>& dlogits) {
        const int L = net_.logits_node;
        for (int i = 0; i <= L; ++i) {
            NodeState& s = st_[static_cast<std::size_t>(i)];
            s.grad.resize(s.value.shape);
        }
        if (!(dlogits.shape == st_[static_cast<std::size_t>(L)].value.shape))
            throw ShapeError("backward: gradient shape " + dlogits.shape.str() +
                             " does not match logits " +
                             st_[static_cast<std::size_t>(L)].value.shape.str());
        st_[static_cast<std::size_t>(L)].grad = dlogits;

        for (int i = L; i >= 1; --i) {
            const NodeDesc& nd = net_.nodes[static_cast<std::size_t>(i)];
            NodeState& s = st_[static_cast<std::size_t>(i)];
            const int p0 = nd.inputs.empty() ? -1 : nd.inputs[0];
            switch (nd.op) {
                case Op::conv: {
                    const bool skip_dx = net_.nodes[static_cast<std::size_t>(p0)].op == Op::input;
                    conv2d_backward(val(p0), s.w, nd.pad, s.grad, skip_dx ? nullptr : &scratch_,
                                    s.dw, s.db);
                    if (!skip_dx) add_into(grad(p0), scratch_);
                    break;
                }
                case Op::bn:
                    batchnorm_backward(s.gamma, s.bn_cache, nd.bn_mode, s.grad, scratch_,
                                       s.dgamma, s.dbeta);
                    add_into(grad(p0), scratch_);
                    break;
                case Op::relu:
                    relu_backward(val(p0), s.grad, scratch_);
                    add_into(grad(p0), scratch_);
                    break;
                case Op::maxpool:
                    maxpool2x2_backward(s.pool_switches, val(p0).shape, s.grad, scratch_);
                    add_into(grad(p0), scratch_);
                    break;
                case Op::gap:
                    global_avg_pool_backward(val(p0).shape, s.grad, scratch_);
                    add_into(grad(p0), scratch_);
                    break;
                case Op::concat:
                    concat_channels_backward(s.grad, nd.split, scratch_, scratch_b_);
                    add_into(grad(nd.inputs[0]), scratch_);
                    add_into(grad(nd.inputs[1]), scratch_b_);
                    break;
                case Op::dense:
                    dense_backward(val(p0), s.w, s.grad, &scratch_, s.dw, s.db);
                    add_into(grad(p0), scratch_);
                    break;
                case Op::flatten: {
                    Tensor<T>& pg = grad(p0);
                    for (std::size_t k = 0; k < pg.data.size(); ++k)
                        pg.data[k] += s.grad.data[k];
                    break;
                }
                case Op::input:
                case Op::softmax:
                    break;
            }
        }
    }

    // Exact running-statistics refresh: capture pooled moments of every
    // normalization input over any number of forward passes, then commit
    // them as the inference statistics. Replaces stale momentum averages
    // after training.
    void begin_stat_capture() {
        for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
            if (net_.nodes[i].op != Op::bn) continue;
            NodeState& s = st_[i];
            s.stat_sum.assign(static_cast<std::size_t>(net_.nodes[i].bn_len), 0.0);
            s.stat_sumsq.assign(static_cast<std::size_t>(net_.nodes[i].bn_len), 0.0);
            s.stat_count = 0;
        }
    }

    void accumulate_stats() {
        for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
            const NodeDesc& nd = net_.nodes[i];
            if (nd.op != Op::bn) continue;
            NodeState& s = st_[i];
            const Tensor<T>& x = val(nd.inputs[0]);
            detail::bn_for_each(x, nd.bn_mode, [&](std::int64_t k, int g) {
                const double v = static_cast<double>(x.data[static_cast<std::size_t>(k)]);
                s.stat_sum[static_cast<std::size_t>(g)] += v;
                s.stat_sumsq[static_cast<std::size_t>(g)] += v * v;
            });
            s.stat_count += x.size() / nd.bn_len;
        }
    }

    void commit_stats() {
        for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
            const NodeDesc& nd = net_.nodes[i];
            if (nd.op != Op::bn) continue;
            NodeState& s = st_[i];
            if (s.stat_count == 0) continue;
            for (int g = 0; g < nd.bn_len; ++g) {
                const std::size_t gg = static_cast<std::size_t>(g);
                const double mean = s.stat_sum[gg] / static_cast<double>(s.stat_count);
                const double var =
                    s.stat_sumsq[gg] / static_cast<double>(s.stat_count) - mean * mean;
                s.rmean.data[gg] = static_cast<T>(mean);
                s.rvar.data[gg] = static_cast<T>(var > 0.0 ? var : 0.0);
            }
        }
    }

private:
    struct NodeState {
        Tensor<T> value, grad;
        Tensor<T> w, b, dw, db;
        Tensor<T> gamma, beta, dgamma, dbeta, rmean, rvar;
        BnCache<T> bn_cache;
        std::vector<std::uint8_t> pool_switches;
        std::vector<double> stat_sum, stat_sumsq;
        std::int64_t stat_count = 0;
    };

    const Tensor<T>& val(int id) const { return st_[static_cast<std::size_t>(id)].value; }
    Tensor<T>& grad(int id) { return st_[static_cast<std::size_t>(id)].grad; }

    static void add_into(Tensor<T>& dst, const Tensor<T>& src) {
        if (!(dst.shape == src.shape))
            throw ShapeError("gradient accumulation shape mismatch: " + dst.shape.str() + " vs " +
                             src.shape.str());
        for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
    }

    static void fnv(std::uint64_t& h, std::uint8_t byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    }

    void reset_params() {
        for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
            const NodeDesc& nd = net_.nodes[i];
            NodeState& s = st_[i];
            if (nd.op == Op::conv || nd.op == Op::dense) {
                s.w.fill(T(0));
                s.b.fill(T(0));
            } else if (nd.op == Op::bn) {
                s.gamma.fill(T(1));
                s.beta.fill(T(0));
                s.rmean.fill(T(0));
                s.rvar.fill(T(1));
            }
        }
    }

    LoweredNet net_;
    std::vector<NodeState> st_;
    Tensor<T> scratch_, scratch_b_;
};

}  // namespace tnet
