#pragma once

#include <string>
#include <vector>

#include "tnet/netdef.hpp"

// Lowered form: composite blocks expanded into primitive nodes with inferred
// shapes. Node shapes are stored for a single sample; the executor scales the
// batch extent at run time.

namespace tnet {

enum class Op { input, conv, bn, relu, maxpool, gap, softmax, concat, dense, flatten };

const char* op_name(Op op);

struct NodeDesc {
    Op op = Op::input;
    std::vector<int> inputs;  // producer node ids
    std::string name;         // "L{id}.{op}", also the parameter name prefix
    // conv
    int kh = 0, kw = 0, in_ch = 0, out_ch = 0;
    Pad pad = Pad::same;
    // bn
    int bn_len = 0;
    BnMode bn_mode = BnMode::width_axis;
    // dense
    int in_features = 0, out_features = 0;
    // concat: channel count contributed by inputs[0]
    int split = 0;
    // inferred per-sample output extents
    int c = 0, h = 0, w = 0;
};

struct LoweredNet {
    NetworkDef def;
    std::vector<NodeDesc> nodes;  // nodes[0] is the input; topologically ordered
    int logits_node = -1;         // input of the final softmax
    int output_node = -1;         // the softmax node
};

// Expands blocks, applies the activation policy (rectifier after every
// convolution or dense layer except class scores, merge-feeding expands, and
// the convolution preceding a normalization), infers shapes, and rejects
// impossible geometry. Throws BuildError.
LoweredNet lower(const NetworkDef& def);

}  // namespace tnet
