#pragma once

#include <string>
#include <vector>

#include "tnet/lowering.hpp"

// Static cost accounting over a lowered network, per sample.
//
// Conventions (documented in the README):
//   conv MACs   = kh*kw*in_ch*out_ch*H_out*W_out, dense = in*out
//   norm        = 1 MAC per element (fused scale and shift)
//   relu        = 1 op per element, softmax = 1 op per element
//   max-pool    = 3 compares per output element
//   gap         = H*W adds per channel
//   concat, flatten, input = free
//   total FLOPs = 2 * total MACs
// Parameter counts are trainable-only: conv out*(in*kh*kw)+out,
// dense in*out+out, norm 2*axis_length (running statistics excluded).

namespace tnet {

struct CostRow {
    std::string name;
    long long params = 0;
    long long macs = 0;
    int out_c = 0, out_h = 0, out_w = 0;
};

struct CostReport {
    std::string network;
    std::vector<CostRow> rows;
    long long total_params = 0;
    long long total_macs = 0;
    long long total_flops = 0;
};

CostReport cost_report(const LoweredNet& net);

// Aligned per-layer table plus totals; when the definition carries published
// reference measurements the footer prints them, including any residual
// between the published parameter total and this accounting.
std::string format_cost_report(const CostReport& report, const NetworkDef& def);

}  // namespace tnet
