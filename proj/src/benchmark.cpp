#include "tnet/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "tnet/cost.hpp"
#include "tnet/rng.hpp"

namespace tnet {

BenchReport bench(Network<float>& model, int warmup, int runs) {
    if (engine_thread_count() != 1)
        throw EngineError("benchmark requires a single-threaded engine, got " +
                          std::to_string(engine_thread_count()) + " threads");
    if (runs < 1) throw EngineError("benchmark needs at least one measured run");

    const NetworkDef& def = model.lowered().def;
    Tensor<float> x(Shape{1, def.in_ch, def.in_h, def.in_w});
    Rng rng(20260822);
    for (auto& v : x.data) v = static_cast<float>(rng.uniform01());

    BenchReport rep;
    rep.name = def.name.empty() ? "custom" : def.name;
    rep.warmup = warmup;
    rep.runs = runs;
    rep.published = def.reference;
    const CostReport cost = cost_report(model.lowered());
    rep.params = cost.total_params;
    rep.flops = cost.total_flops;

    using clock = std::chrono::steady_clock;
    for (int i = 0; i < warmup; ++i) model.forward(x, Phase::infer);
    for (int i = 0; i < runs; ++i) {
        const auto t0 = clock::now();
        model.forward(x, Phase::infer);
        const auto t1 = clock::now();
        rep.latencies_ms.push_back(
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
                .count());
    }
    double sum = 0.0;
    for (double v : rep.latencies_ms) sum += v;
    rep.mean_ms = sum / runs;
    double var = 0.0;
    for (double v : rep.latencies_ms) var += (v - rep.mean_ms) * (v - rep.mean_ms);
    rep.std_ms = runs > 1 ? std::sqrt(var / runs) : 0.0;
    return rep;
}

std::vector<BenchReport> compare(std::vector<BenchReport> reports,
                                 const std::string& reference_name) {
    const BenchReport* ref = nullptr;
    for (const BenchReport& r : reports)
        if (r.name == reference_name) ref = &r;
    if (!ref) throw EngineError("reference network '" + reference_name + "' is not in the set");
    const double ref_mean = ref->mean_ms;
    const double ref_published =
        ref->published.present ? ref->published.time_ms : 0.0;
    for (BenchReport& r : reports) {
        r.speedup = r.mean_ms > 0.0 ? ref_mean / r.mean_ms : 0.0;
        r.published_speedup = ref_published > 0.0 && r.published.present &&
                                      r.published.time_ms > 0.0
                                  ? ref_published / r.published.time_ms
                                  : 0.0;
    }
    std::sort(reports.begin(), reports.end(),
              [](const BenchReport& a, const BenchReport& b) { return a.mean_ms < b.mean_ms; });
    return reports;
}

std::string format_compare_table(const std::vector<BenchReport>& reports) {
    std::ostringstream os;
    os << std::left << std::setw(18) << "network" << std::right << std::setw(9) << "params"
       << std::setw(13) << "flops" << std::setw(11) << "mean_ms" << std::setw(9) << "std_ms"
       << std::setw(9) << "speedup" << "  published\n";
    for (const BenchReport& r : reports) {
        os << std::left << std::setw(18) << r.name << std::right << std::setw(9) << r.params
           << std::setw(13) << r.flops << std::fixed << std::setprecision(3) << std::setw(11)
           << r.mean_ms << std::setw(9) << r.std_ms << std::setprecision(2) << std::setw(9)
           << r.speedup;
        os.unsetf(std::ios::fixed);
        os << std::setprecision(6);
        if (r.published.present) {
            os << "  " << std::fixed << std::setprecision(0) << r.published.time_ms << " ms";
            if (r.published_speedup > 0.0)
                os << ", speedup " << std::setprecision(2) << r.published_speedup;
            os.unsetf(std::ios::fixed);
            os << std::setprecision(6);
        }
        os << "\n";
    }
    return os.str();
}

std::string bench_csv_header() { return "name,params,flops,mean_ms,std_ms,speedup"; }

std::string bench_csv_row(const BenchReport& r) {
    std::ostringstream os;
    os << r.name << ',' << r.params << ',' << r.flops << ',' << std::fixed
       << std::setprecision(4) << r.mean_ms << ',' << r.std_ms << ','
       << std::setprecision(3) << r.speedup;
    return os.str();
}

}  // namespace tnet
