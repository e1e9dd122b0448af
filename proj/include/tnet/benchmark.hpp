#pragma once

#include <string>
#include <vector>

#include "tnet/network.hpp"

// Inference latency measurement: one 96x96 image per run, wall time on a
// monotonic clock, strictly single-threaded (the harness refuses to run if
// the engine reports internal parallelism).

namespace tnet {

struct BenchReport {
    std::string name;
    int warmup = 0;
    int runs = 0;
    std::vector<double> latencies_ms;
    double mean_ms = 0.0;
    double std_ms = 0.0;  // population, over the measured runs; 0 when runs == 1
    long long params = 0;
    long long flops = 0;
    // Filled by compare():
    double speedup = 0.0;  // reference mean / this mean
    // Published single-core reference measurements carried by the builder:
    ReferenceResult published;
    double published_speedup = 0.0;  // reference published time / this published time
};

BenchReport bench(Network<float>& model, int warmup = 10, int runs = 50);

// Sorts by mean latency, computes measured speedups against the named
// report, and derives published-reference speedups where both sides carry
// published times. Throws EngineError if the reference is absent.
std::vector<BenchReport> compare(std::vector<BenchReport> reports,
                                 const std::string& reference_name);

std::string format_compare_table(const std::vector<BenchReport>& reports);

// name,params,flops,mean_ms,std_ms,speedup
std::string bench_csv_row(const BenchReport& r);
std::string bench_csv_header();

}  // namespace tnet
