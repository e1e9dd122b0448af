#pragma once

#include "tnet/netdef.hpp"

// Builders for the four evaluated networks. Each attaches the published
// reference measurements (Raspberry Pi 2, single core) for report
// annotation; those numbers are never asserted against local runs.

namespace tnet {

// n stacked Tiny blocks (the first consumes the raw input), then a 1x1
// class-score convolution, global average pooling and softmax.
// filters is 4 or 8 in the published configurations but any count >= 1 works.
NetworkDef tinynet(int filters, int n_modules, int classes);

// 5x5 same-padded stem with 8 filters, n SmallFire blocks with
// squeeze = expand1 = expand3 = 4, then a 5x5 class-score convolution,
// global average pooling and softmax.
NetworkDef smallfirenet(int n_modules, int classes);

// 5x5 stem (8 filters), a 2x2 max-pool, two Fire(16,16,16) blocks, a 5x5
// class-score convolution, global average pooling and softmax. The pool is
// a deliberate deviation from the published description, which states no
// down-sampling anywhere; without it this network would cost more FLOPs
// than the large baseline it is meant to undercut.
NetworkDef fire_baseline(int classes);

// Conv(32,5,5)-MaxPool(2,2)-Conv(32,5,5)-MaxPool(2,2)-FC(64)-FC(classes)
// with valid padding and softmax output.
NetworkDef baseline_cnn(int classes);

}  // namespace tnet
