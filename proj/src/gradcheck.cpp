#include "tnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tnet/network.hpp"

namespace tnet {

namespace {

double loss_at(Network<double>& model, const Tensor<double>& x, int label,
               std::uint64_t* pattern) {
    const Tensor<double>& probs = model.forward(x, Phase::train, false, pattern);
    double p = probs.at(0, label, 0, 0);
    if (p < 1e-12) p = 1e-12;
    return -std::log(p);
}

}  // namespace

GradCheckReport gradient_check(const NetworkDef& def, std::uint64_t seed, double step) {
    Network<double> model(lower(def));
    Rng rng(seed);
    model.init_params(rng);

    Tensor<double> x(Shape{1, def.in_ch, def.in_h, def.in_w});
    for (auto& v : x.data) v = rng.uniform01();
    const int classes = model.lowered().nodes[static_cast<std::size_t>(
        model.lowered().logits_node)].c;
    const int label = static_cast<int>(rng.uniform_int(classes));

    // Analytic pass; the softmax/cross-entropy gradient at the logits is
    // probs - onehot for a single sample.
    std::uint64_t base_pattern = 0;
    const Tensor<double>& probs = model.forward(x, Phase::train, false, &base_pattern);
    Tensor<double> dlogits(probs.shape);
    for (int c = 0; c < classes; ++c)
        dlogits.at(0, c, 0, 0) = probs.at(0, c, 0, 0) - (c == label ? 1.0 : 0.0);
    model.backward_from_logits(dlogits);

    std::vector<std::vector<double>> analytic;
    auto params = model.params();
    for (const auto& p : params)
        analytic.push_back(p.trainable ? p.grad->data : std::vector<double>{});

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        if (!params[pi].trainable) continue;
        auto& values = params[pi].value->data;
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double saved = values[j];
            double h = step;
            bool ok = false;
            double numeric = 0.0;
            // A perturbation that flips any rectifier sign or pooling switch
            // invalidates the central difference; shrink and retry.
            for (int attempt = 0; attempt < 3 && !ok; ++attempt, h *= 0.1) {
                std::uint64_t pat_hi = 0, pat_lo = 0;
                values[j] = saved + h;
                const double hi = loss_at(model, x, label, &pat_hi);
                values[j] = saved - h;
                const double lo = loss_at(model, x, label, &pat_lo);
                values[j] = saved;
                if (pat_hi == base_pattern && pat_lo == base_pattern) {
                    numeric = (hi - lo) / (2.0 * h);
                    ok = true;
                }
            }
            if (!ok) {
                ++report.skipped_kinks;
                continue;
            }
            const double ga = analytic[pi][j];
            const double denom = std::max({std::abs(ga), std::abs(numeric), 1e-3});
            const double rel = std::abs(ga - numeric) / denom;
            ++report.checked;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = params[pi].name + "[" + std::to_string(j) + "]";
            }
        }
    }
    return report;
}

}  // namespace tnet
