#include <cmath>
#include <string>

#include "doctest.h"
#include "tnet/architectures.hpp"
#include "tnet/benchmark.hpp"

using namespace tnet;

namespace {

NetworkDef quick_net() {
    NetworkDef def;
    def.name = "quick";
    def.in_h = 16;
    def.in_w = 16;
    def.classes = 3;
    def.layers = {TinyLayer{2}, ConvLayer{1, 1, 3, Pad::same}, GapLayer{}, SoftmaxLayer{}};
    return def;
}

}  // namespace

TEST_CASE("bench reports per-run latencies and their moments") {
    Network<float> model(lower(quick_net()));
    Rng rng(1);
    model.init_params(rng);
    BenchReport rep = bench(model, 2, 8);
    CHECK(rep.warmup == 2);
    CHECK(rep.runs == 8);
    REQUIRE(rep.latencies_ms.size() == 8);
    double mean = 0.0;
    for (double v : rep.latencies_ms) {
        CHECK(v > 0.0);
        mean += v;
    }
    mean /= 8.0;
    CHECK(rep.mean_ms == doctest::Approx(mean));
    double var = 0.0;
    for (double v : rep.latencies_ms) var += (v - mean) * (v - mean);
    CHECK(rep.std_ms == doctest::Approx(std::sqrt(var / 8.0)));
    CHECK(rep.flops > 0);
    // conv3x3 1->2 (20) + conv1x1 2->2 (6) + norm 2*16 + head 2->3 (9)
    CHECK(rep.params == 20 + 6 + 32 + 9);

    BenchReport single = bench(model, 0, 1);
    CHECK(single.std_ms == 0.0);
}

TEST_CASE("compare sorts by mean and computes both speedup kinds") {
    BenchReport fast, slow;
    fast.name = "fast";
    fast.mean_ms = 2.0;
    fast.published.present = true;
    fast.published.time_ms = 100.0;
    slow.name = "slow";
    slow.mean_ms = 8.0;
    slow.published.present = true;
    slow.published.time_ms = 400.0;

    auto sorted = compare({slow, fast}, "slow");
    REQUIRE(sorted.size() == 2);
    CHECK(sorted[0].name == "fast");
    CHECK(sorted[0].speedup == doctest::Approx(4.0));
    CHECK(sorted[1].speedup == doctest::Approx(1.0));
    CHECK(sorted[0].published_speedup == doctest::Approx(4.0));

    CHECK_THROWS_AS(compare({fast}, "absent"), EngineError);
}

TEST_CASE("the comparison table and csv are well formed") {
    BenchReport r;
    r.name = "net";
    r.mean_ms = 1.25;
    r.std_ms = 0.5;
    r.params = 42;
    r.flops = 1000;
    r.speedup = 2.0;
    const std::string table = format_compare_table({r});
    CHECK(table.find("net") != std::string::npos);
    CHECK(table.find("1.25") != std::string::npos);
    CHECK(bench_csv_header() == "name,params,flops,mean_ms,std_ms,speedup");
    const std::string row = bench_csv_row(r);
    CHECK(row.rfind("net,42,1000,", 0) == 0);
}

TEST_CASE("the engine declares itself single threaded") {
    CHECK(engine_thread_count() == 1);
}
