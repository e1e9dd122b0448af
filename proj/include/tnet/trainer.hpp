#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tnet/dataset.hpp"
#include "tnet/network.hpp"

// Cross-entropy training with ADAM, plus the k-fold evaluation harness.
// Everything is single-threaded and deterministic given the seed.

namespace tnet {

struct TrainConfig {
    double lr = 0.1;
    int epochs = 30;
    int batch = 128;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 1;
    // After the last epoch, replace the momentum-averaged normalization
    // statistics with exact dataset moments (one extra pass). At a few
    // hundred optimizer steps the momentum average still remembers its
    // initialization, which wrecks inference-phase accuracy.
    bool recalibrate_stats = true;
};

struct MetricRow {
    int epoch = 0;
    int batch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainResult {
    std::vector<MetricRow> metrics;
    double final_train_accuracy = 0.0;
};

// Mean -log p[label] with p clamped at 1e-12.
double cross_entropy_loss(const Tensor<float>& probs, const std::vector<int>& labels);

// Combined softmax and cross-entropy gradient at the logits:
// (p - onehot) / batch.
void softmax_ce_grad(const Tensor<float>& probs, const std::vector<int>& labels,
                     Tensor<float>& dlogits);

class Adam {
public:
    Adam(double lr, double beta1, double beta2, double eps)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    // Applies one update to every trainable parameter; grads are read as
    // produced by backward_from_logits. Moment buffers are keyed by position
    // in the parameter list, which is stable for a given network.
    void step(std::vector<ParamRef<float>>& params);

    int steps_taken() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<std::vector<float>> m_, v_;
};

// Initializes the model from cfg.seed and runs the full loop. Metric rows
// stream to metrics_out (CSV: epoch,batch,loss,accuracy) when given.
// Throws DivergenceError on a non-finite loss.
TrainResult train(Network<float>& model, const std::vector<LabeledImage>& data,
                  const TrainConfig& cfg, std::ostream* metrics_out = nullptr);

double evaluate_accuracy(Network<float>& model, const std::vector<LabeledImage>& data,
                         int batch = 128);

struct KFoldResult {
    std::vector<double> fold_accuracy;
    double mean = 0.0;
    double stddev = 0.0;  // population, over folds
};

// Stratified seeded k-fold: train on k-1 folds, test on the held-out one,
// fresh parameters per fold. A fold missing some class warns on stderr.
KFoldResult kfold_evaluate(const LoweredNet& net, const std::vector<LabeledImage>& data, int k,
                           const TrainConfig& cfg);

}  // namespace tnet
