#include "tnet/cost.hpp"

#include <iomanip>
#include <sstream>

namespace tnet {

CostReport cost_report(const LoweredNet& net) {
    CostReport rep;
    rep.network = net.def.name;
    for (const NodeDesc& nd : net.nodes) {
        CostRow row;
        row.name = nd.name;
        row.out_c = nd.c;
        row.out_h = nd.h;
        row.out_w = nd.w;
        const long long hw = static_cast<long long>(nd.h) * nd.w;
        const long long elems = hw * nd.c;
        switch (nd.op) {
            case Op::conv:
                row.params = static_cast<long long>(nd.out_ch) * nd.in_ch * nd.kh * nd.kw +
                             nd.out_ch;
                row.macs = static_cast<long long>(nd.kh) * nd.kw * nd.in_ch * nd.out_ch * hw;
                break;
            case Op::dense:
                row.params = static_cast<long long>(nd.in_features) * nd.out_features +
                             nd.out_features;
                row.macs = static_cast<long long>(nd.in_features) * nd.out_features;
                break;
            case Op::bn:
                row.params = 2LL * nd.bn_len;
                row.macs = elems;
                break;
            case Op::relu:
            case Op::softmax:
                row.macs = elems;
                break;
            case Op::maxpool:
                row.macs = 3 * elems;
                break;
            case Op::gap: {
                const NodeDesc& p = net.nodes[static_cast<std::size_t>(nd.inputs[0])];
                row.macs = static_cast<long long>(p.h) * p.w * p.c;
                break;
            }
            case Op::input:
            case Op::concat:
            case Op::flatten:
                break;
        }
        rep.total_params += row.params;
        rep.total_macs += row.macs;
        rep.rows.push_back(std::move(row));
    }
    rep.total_flops = 2 * rep.total_macs;
    return rep;
}

std::string format_cost_report(const CostReport& report, const NetworkDef& def) {
    std::ostringstream os;
    os << "network " << (report.network.empty() ? "custom" : report.network) << "\n";
    os << std::left << std::setw(14) << "layer" << std::right << std::setw(10) << "params"
       << std::setw(14) << "macs" << "  output\n";
    for (const CostRow& r : report.rows) {
        os << std::left << std::setw(14) << r.name << std::right << std::setw(10) << r.params
           << std::setw(14) << r.macs << "  " << r.out_c << "x" << r.out_h << "x" << r.out_w
           << "\n";
    }
    os << std::left << std::setw(14) << "total" << std::right << std::setw(10)
       << report.total_params << std::setw(14) << report.total_macs << "  flops "
       << report.total_flops << "\n";
    if (def.reference.present) {
        os << "published reference: " << def.reference.params << " params, "
           << std::fixed << std::setprecision(1) << def.reference.accuracy_pct << "% accuracy, "
           << std::setprecision(0) << def.reference.time_ms << " ms single-core\n";
        const long long residual = def.reference.params - report.total_params;
        if (residual > 0)
            os << "residual vs published params: +" << residual
               << " (unexplained normalization parameters in the published total)\n";
        else if (residual < 0)
            os << "residual vs published params: " << residual
               << " (published total is rounded)\n";
    }
    return os.str();
}

}  // namespace tnet
