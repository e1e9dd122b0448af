#include "tnet/lowering.hpp"

#include <string>

namespace tnet {

const char* op_name(Op op) {
    switch (op) {
        case Op::input: return "input";
        case Op::conv: return "conv";
        case Op::bn: return "bn";
        case Op::relu: return "relu";
        case Op::maxpool: return "maxpool";
        case Op::gap: return "gap";
        case Op::softmax: return "softmax";
        case Op::concat: return "concat";
        case Op::dense: return "dense";
        case Op::flatten: return "flatten";
    }
    return "?";
}

namespace {

struct Builder {
    LoweredNet out;
    std::size_t layer_idx = 0;  // 1-based position of the structural layer being lowered

    int add(NodeDesc nd) {
        const int id = static_cast<int>(out.nodes.size());
        nd.name = "L" + std::to_string(id) + "." + op_name(nd.op);
        out.nodes.push_back(std::move(nd));
        return id;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw BuildError(msg + " at layer " + std::to_string(layer_idx));
    }

    int conv(int in, int kh, int kw, int filters, Pad pad) {
        const NodeDesc& p = out.nodes[static_cast<std::size_t>(in)];
        NodeDesc nd;
        nd.op = Op::conv;
        nd.inputs = {in};
        nd.kh = kh;
        nd.kw = kw;
        nd.in_ch = p.c;
        nd.out_ch = filters;
        nd.pad = pad;
        nd.c = filters;
        if (pad == Pad::same) {
            nd.h = p.h;
            nd.w = p.w;
        } else {
            nd.h = p.h - kh + 1;
            nd.w = p.w - kw + 1;
            if (nd.h < 1 || nd.w < 1)
                fail("valid-padded " + std::to_string(kh) + "x" + std::to_string(kw) +
                     " convolution does not fit " + std::to_string(p.h) + "x" +
                     std::to_string(p.w));
        }
        return add(nd);
    }

    int relu(int in) {
        const NodeDesc& p = out.nodes[static_cast<std::size_t>(in)];
        NodeDesc nd;
        nd.op = Op::relu;
        nd.inputs = {in};
        nd.c = p.c;
        nd.h = p.h;
        nd.w = p.w;
        return add(nd);
    }

    int maxpool(int in) {
        const NodeDesc& p = out.nodes[static_cast<std::size_t>(in)];
        if (p.h < 2 || p.w < 2)
            fail("spatial extent exhausted: cannot 2x2-pool a " + std::to_string(p.h) + "x" +
                 std::to_string(p.w) + " map");
        NodeDesc nd;
        nd.op = Op::maxpool;
        nd.inputs = {in};
        nd.c = p.c;
        nd.h = p.h / 2;
        nd.w = p.w / 2;
        return add(nd);
    }

    int bn(int in, BnMode mode) {
        const NodeDesc& p = out.nodes[static_cast<std::size_t>(in)];
        NodeDesc nd;
        nd.op = Op::bn;
        nd.inputs = {in};
        nd.bn_mode = mode;
        nd.bn_len = mode == BnMode::width_axis ? p.w : p.c;
        nd.c = p.c;
        nd.h = p.h;
        nd.w = p.w;
        return add(nd);
    }

    int fire(int in, const FireLayer& f) {
        int sq = conv(in, 1, 1, f.squeeze, Pad::same);
        sq = relu(sq);
        const int e1 = conv(sq, 1, 1, f.expand1, Pad::same);
        const int e3 = conv(sq, 3, 3, f.expand3, Pad::same);
        const NodeDesc& a = out.nodes[static_cast<std::size_t>(e1)];
        NodeDesc nd;
        nd.op = Op::concat;
        nd.inputs = {e1, e3};
        nd.split = f.expand1;
        nd.c = f.expand1 + f.expand3;
        nd.h = a.h;
        nd.w = a.w;
        return relu(add(nd));
    }
};

}  // namespace

LoweredNet lower(const NetworkDef& def) {
    validate(def);
    Builder b;
    b.out.def = def;

    NodeDesc input;
    input.op = Op::input;
    input.c = def.in_ch;
    input.h = def.in_h;
    input.w = def.in_w;
    int cur = b.add(input);

    for (std::size_t i = 0; i < def.layers.size(); ++i) {
        b.layer_idx = i + 1;
        const Layer& layer = def.layers[i];
        const Layer* next = i + 1 < def.layers.size() ? &def.layers[i + 1] : nullptr;
        const bool class_score =
            next && (std::holds_alternative<GapLayer>(*next) ||
                     std::holds_alternative<SoftmaxLayer>(*next));

        if (const auto* c = std::get_if<ConvLayer>(&layer)) {
            cur = b.conv(cur, c->kh, c->kw, c->filters, c->pad);
            if (!class_score) cur = b.relu(cur);
        } else if (const auto* t = std::get_if<TinyLayer>(&layer)) {
            cur = b.conv(cur, 3, 3, t->filters, Pad::same);
            cur = b.relu(cur);
            cur = b.conv(cur, 1, 1, t->filters, Pad::same);
            cur = b.bn(cur, def.bn_mode);
            cur = b.relu(cur);
            cur = b.maxpool(cur);
        } else if (const auto* f = std::get_if<FireLayer>(&layer)) {
            cur = b.fire(cur, *f);
        } else if (const auto* sf = std::get_if<SmallFireLayer>(&layer)) {
            const FireLayer inner{sf->squeeze, sf->expand1, sf->expand3};
            cur = b.fire(cur, inner);
            cur = b.fire(cur, inner);
            cur = b.maxpool(cur);
        } else if (std::holds_alternative<MaxPoolLayer>(layer)) {
            cur = b.maxpool(cur);
        } else if (std::holds_alternative<GapLayer>(layer)) {
            const NodeDesc& p = b.out.nodes[static_cast<std::size_t>(cur)];
            NodeDesc nd;
            nd.op = Op::gap;
            nd.inputs = {cur};
            nd.c = p.c;
            nd.h = 1;
            nd.w = 1;
            cur = b.add(nd);
        } else if (std::holds_alternative<FlattenLayer>(layer)) {
            const NodeDesc& p = b.out.nodes[static_cast<std::size_t>(cur)];
            NodeDesc nd;
            nd.op = Op::flatten;
            nd.inputs = {cur};
            nd.c = p.c * p.h * p.w;
            nd.h = 1;
            nd.w = 1;
            cur = b.add(nd);
        } else if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            const NodeDesc& p = b.out.nodes[static_cast<std::size_t>(cur)];
            if (p.h != 1 || p.w != 1)
                b.fail("dense layer needs a flattened or pooled input, got " +
                       std::to_string(p.c) + "x" + std::to_string(p.h) + "x" +
                       std::to_string(p.w));
            NodeDesc nd;
            nd.op = Op::dense;
            nd.inputs = {cur};
            nd.in_features = p.c;
            nd.out_features = d->units;
            nd.c = d->units;
            nd.h = 1;
            nd.w = 1;
            cur = b.add(nd);
            const bool last_dense =
                next && std::holds_alternative<SoftmaxLayer>(*next);
            if (!last_dense) cur = b.relu(cur);
        } else if (std::holds_alternative<SoftmaxLayer>(layer)) {
            const NodeDesc& p = b.out.nodes[static_cast<std::size_t>(cur)];
            if (p.h != 1 || p.w != 1)
                b.fail("softmax needs a spatially reduced input, got " + std::to_string(p.h) +
                       "x" + std::to_string(p.w));
            b.out.logits_node = cur;
            NodeDesc nd;
            nd.op = Op::softmax;
            nd.inputs = {cur};
            nd.c = p.c;
            nd.h = 1;
            nd.w = 1;
            cur = b.add(nd);
            b.out.output_node = cur;
        }
    }
    return b.out;
}

}  // namespace tnet
