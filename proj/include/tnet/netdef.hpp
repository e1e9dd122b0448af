#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tnet/defs.hpp"
#include "tnet/errors.hpp"

// Declarative network description. A NetworkDef lists composite layers in
// order; lowering (lowering.hpp) expands blocks into primitive nodes and
// runs shape inference.

namespace tnet {

struct ConvLayer {
    int kh = 3, kw = 3;
    int filters = 1;
    Pad pad = Pad::same;
};

struct TinyLayer {
    int filters = 4;
};

struct FireLayer {
    int squeeze = 4, expand1 = 4, expand3 = 4;
};

struct SmallFireLayer {
    int squeeze = 4, expand1 = 4, expand3 = 4;
};

struct MaxPoolLayer {};
struct GapLayer {};
struct FlattenLayer {};

struct DenseLayer {
    int units = 1;
};

struct SoftmaxLayer {};

using Layer = std::variant<ConvLayer, TinyLayer, FireLayer, SmallFireLayer, MaxPoolLayer,
                           GapLayer, FlattenLayer, DenseLayer, SoftmaxLayer>;

// Published measurements for a known configuration, attached by the builders
// for report annotation. Never asserted against this engine's own runs.
struct ReferenceResult {
    bool present = false;
    long long params = 0;         // published trainable-parameter total
    double accuracy_pct = 0.0;    // published mean test accuracy
    double time_ms = 0.0;         // published single-core time per image
    double speedup = 0.0;         // published speedup vs the large baseline (0 = n/a)
};

struct NetworkDef {
    std::string name;
    int in_ch = 1, in_h = 96, in_w = 96;
    int classes = 11;
    BnMode bn_mode = BnMode::width_axis;
    std::vector<Layer> layers;
    ReferenceResult reference;
};

// Structural checks that do not need shape inference: at least one layer,
// softmax exactly once and last, preceded by gap or dense, positive counts,
// conv kernels square with extent 1, 3 or 5. Throws BuildError.
void validate(const NetworkDef& def);

}  // namespace tnet
