#include "tnet/architectures.hpp"

#include <string>

#include "tnet/errors.hpp"

namespace tnet {

namespace {

// Down-sampling blocks halve the spatial extent; reject configurations that
// would pool a map below 2x2.
void check_halvings(int extent, int n, const std::string& what) {
    if (n < 1) throw BuildError(what + " needs at least one module");
    if ((extent >> n) < 2)
        throw BuildError("spatial extent exhausted: " + std::to_string(n) + " halvings take " +
                         std::to_string(extent) + " below 2");
}

ReferenceResult published(long long params, double acc, double time_ms, double speedup) {
    ReferenceResult r;
    r.present = true;
    r.params = params;
    r.accuracy_pct = acc;
    r.time_ms = time_ms;
    r.speedup = speedup;
    return r;
}

}  // namespace

NetworkDef tinynet(int filters, int n_modules, int classes) {
    if (filters < 1) throw BuildError("tinynet needs at least one filter");
    if (classes < 2) throw BuildError("tinynet needs at least two classes");
    NetworkDef def;
    def.name = "tinynet-" + std::to_string(filters) + "-" + std::to_string(n_modules);
    check_halvings(def.in_h < def.in_w ? def.in_h : def.in_w, n_modules, "tinynet");
    def.classes = classes;
    for (int i = 0; i < n_modules; ++i) def.layers.push_back(TinyLayer{filters});
    def.layers.push_back(ConvLayer{1, 1, classes, Pad::same});
    def.layers.push_back(GapLayer{});
    def.layers.push_back(SoftmaxLayer{});

    if (classes == 11 && (filters == 4 || filters == 8) && n_modules <= 5) {
        static const long long params4[] = {307, 571, 787, 979, 1159};
        static const double acc4[] = {93.5, 95.0, 95.9, 97.0, 98.8};
        static const double ms4[] = {28, 35, 38, 40, 42};
        static const long long params8[] = {443, 1195, 1899, 2579, 3247};
        static const double acc8[] = {95.8, 98.2, 98.4, 98.8, 99.6};
        static const double ms8[] = {57, 88, 95, 99, 110};
        const int i = n_modules - 1;
        if (filters == 4)
            def.reference = published(params4[i], acc4[i], ms4[i], n_modules == 5 ? 28.6 : 0.0);
        else
            def.reference = published(params8[i], acc8[i], ms8[i], n_modules == 5 ? 10.9 : 0.0);
    }
    return def;
}

NetworkDef smallfirenet(int n_modules, int classes) {
    if (classes < 2) throw BuildError("smallfirenet needs at least two classes");
    NetworkDef def;
    def.name = "smallfirenet-" + std::to_string(n_modules);
    check_halvings(def.in_h < def.in_w ? def.in_h : def.in_w, n_modules, "smallfirenet");
    def.classes = classes;
    def.layers.push_back(ConvLayer{5, 5, 8, Pad::same});
    for (int i = 0; i < n_modules; ++i) def.layers.push_back(SmallFireLayer{4, 4, 4});
    def.layers.push_back(ConvLayer{5, 5, classes, Pad::same});
    def.layers.push_back(GapLayer{});
    def.layers.push_back(SoftmaxLayer{});

    if (classes == 11 && n_modules <= 3) {
        static const long long params[] = {3163, 3643, 4087};
        static const double acc[] = {99.0, 99.7, 99.8};
        static const double ms[] = {70, 59, 61};
        const int i = n_modules - 1;
        def.reference = published(params[i], acc[i], ms[i], n_modules == 3 ? 19.7 : 0.0);
    }
    return def;
}

NetworkDef fire_baseline(int classes) {
    if (classes < 2) throw BuildError("fire baseline needs at least two classes");
    NetworkDef def;
    def.name = "fire-baseline";
    def.classes = classes;
    def.layers.push_back(ConvLayer{5, 5, 8, Pad::same});
    def.layers.push_back(MaxPoolLayer{});
    def.layers.push_back(FireLayer{16, 16, 16});
    def.layers.push_back(FireLayer{16, 16, 16});
    def.layers.push_back(ConvLayer{5, 5, classes, Pad::same});
    def.layers.push_back(GapLayer{});
    def.layers.push_back(SoftmaxLayer{});
    if (classes == 11) def.reference = published(18000, 99.6, 600, 2.0);
    return def;
}

NetworkDef baseline_cnn(int classes) {
    if (classes < 2) throw BuildError("baseline cnn needs at least two classes");
    NetworkDef def;
    def.name = "baseline-cnn";
    def.classes = classes;
    def.layers.push_back(ConvLayer{5, 5, 32, Pad::valid});
    def.layers.push_back(MaxPoolLayer{});
    def.layers.push_back(ConvLayer{5, 5, 32, Pad::valid});
    def.layers.push_back(MaxPoolLayer{});
    def.layers.push_back(FlattenLayer{});
    def.layers.push_back(DenseLayer{64});
    def.layers.push_back(DenseLayer{classes});
    def.layers.push_back(SoftmaxLayer{});
    if (classes == 11) def.reference = published(930000, 98.8, 1200, 0.0);
    return def;
}

}  // namespace tnet
