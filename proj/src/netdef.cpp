#include "tnet/netdef.hpp"

#include <string>

namespace tnet {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw BuildError(msg);
}

void check_counts(const Layer& layer, std::size_t idx) {
    const std::string at = " at layer " + std::to_string(idx + 1);
    if (const auto* c = std::get_if<ConvLayer>(&layer)) {
        require(c->kh == c->kw && (c->kh == 1 || c->kh == 3 || c->kh == 5),
                "unsupported kernel size " + std::to_string(c->kh) + "x" +
                    std::to_string(c->kw) + at);
        require(c->filters >= 1, "convolution needs at least one filter" + at);
    } else if (const auto* t = std::get_if<TinyLayer>(&layer)) {
        require(t->filters >= 1, "tiny block needs at least one filter" + at);
    } else if (const auto* f = std::get_if<FireLayer>(&layer)) {
        require(f->squeeze >= 1 && f->expand1 >= 1 && f->expand3 >= 1,
                "fire block needs positive squeeze and expand counts" + at);
    } else if (const auto* sf = std::get_if<SmallFireLayer>(&layer)) {
        require(sf->squeeze >= 1 && sf->expand1 >= 1 && sf->expand3 >= 1,
                "smallfire block needs positive squeeze and expand counts" + at);
    } else if (const auto* d = std::get_if<DenseLayer>(&layer)) {
        require(d->units >= 1, "dense layer needs at least one unit" + at);
    }
}

}  // namespace

void validate(const NetworkDef& def) {
    require(def.in_ch >= 1 && def.in_h >= 1 && def.in_w >= 1,
            "input extents must be positive");
    require(!def.layers.empty(), "network has no layers");
    for (std::size_t i = 0; i < def.layers.size(); ++i) {
        check_counts(def.layers[i], i);
        const bool is_softmax = std::holds_alternative<SoftmaxLayer>(def.layers[i]);
        require(is_softmax == (i + 1 == def.layers.size()),
                is_softmax ? "softmax must be the final layer"
                           : "network must end with softmax");
    }
    const std::size_t pre = def.layers.size() - 2;
    require(def.layers.size() >= 2 && (std::holds_alternative<GapLayer>(def.layers[pre]) ||
                                       std::holds_alternative<DenseLayer>(def.layers[pre])),
            "softmax must follow global average pooling or a dense layer");
}

}  // namespace tnet
