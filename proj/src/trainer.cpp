#include "tnet/trainer.hpp"

#include <cmath>
#include <iostream>
#include <ostream>

#include "tnet/errors.hpp"
#include "tnet/rng.hpp"

namespace tnet {

double cross_entropy_loss(const Tensor<float>& probs, const std::vector<int>& labels) {
    const int B = probs.shape.n, C = probs.shape.c;
    double total = 0.0;
    for (int n = 0; n < B; ++n) {
        const int label = labels[static_cast<std::size_t>(n)];
        if (label < 0 || label >= C)
            throw DataError("label " + std::to_string(label) + " out of range for " +
                            std::to_string(C) + " classes");
        double p = probs.at(n, label, 0, 0);
        if (p < 1e-12) p = 1e-12;
        total -= std::log(p);
    }
    return total / B;
}

void softmax_ce_grad(const Tensor<float>& probs, const std::vector<int>& labels,
                     Tensor<float>& dlogits) {
    const int B = probs.shape.n, C = probs.shape.c;
    dlogits.resize(probs.shape);
    const float inv_b = 1.0f / static_cast<float>(B);
    for (int n = 0; n < B; ++n) {
        for (int c = 0; c < C; ++c) {
            const float onehot = c == labels[static_cast<std::size_t>(n)] ? 1.0f : 0.0f;
            dlogits.at(n, c, 0, 0) = (probs.at(n, c, 0, 0) - onehot) * inv_b;
        }
    }
}

void Adam::step(std::vector<ParamRef<float>>& params) {
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!params[i].trainable) continue;
            m_[i].assign(params[i].value->data.size(), 0.0f);
            v_[i].assign(params[i].value->data.size(), 0.0f);
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable) continue;
        auto& value = params[i].value->data;
        const auto& grad = params[i].grad->data;
        if (grad.size() != value.size())
            throw ShapeError("optimizer: gradient missing for " + params[i].name);
        for (std::size_t j = 0; j < value.size(); ++j) {
            const double g = grad[j];
            const double m = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
            const double v = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
            m_[i][j] = static_cast<float>(m);
            v_[i][j] = static_cast<float>(v);
            value[j] -= static_cast<float>(lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_));
        }
    }
}

namespace {

void fill_batch(const std::vector<LabeledImage>& data, const std::vector<int>& order,
                std::size_t begin, std::size_t end, Tensor<float>& batch,
                std::vector<int>& labels) {
    const Shape one = data[0].pixels.shape;
    batch.resize(Shape{static_cast<int>(end - begin), one.c, one.h, one.w});
    labels.clear();
    const std::size_t stride = static_cast<std::size_t>(one.elems());
    for (std::size_t i = begin; i < end; ++i) {
        const LabeledImage& img = data[static_cast<std::size_t>(order[i])];
        std::copy(img.pixels.data.begin(), img.pixels.data.end(),
                  batch.data.begin() + static_cast<std::ptrdiff_t>((i - begin) * stride));
        labels.push_back(img.label);
    }
}

int correct_count(const Tensor<float>& probs, const std::vector<int>& labels) {
    int correct = 0;
    for (int n = 0; n < probs.shape.n; ++n) {
        int best = 0;
        for (int c = 1; c < probs.shape.c; ++c)
            if (probs.at(n, c, 0, 0) > probs.at(n, best, 0, 0)) best = c;
        if (best == labels[static_cast<std::size_t>(n)]) ++correct;
    }
    return correct;
}

}  // namespace

TrainResult train(Network<float>& model, const std::vector<LabeledImage>& data,
                  const TrainConfig& cfg, std::ostream* metrics_out) {
    if (data.empty()) throw DataError("training set is empty");
    if (cfg.lr <= 0 || cfg.batch < 1 || cfg.epochs < 1 || cfg.beta1 < 0 || cfg.beta1 >= 1 ||
        cfg.beta2 < 0 || cfg.beta2 >= 1)
        throw DataError("invalid training configuration");

    Rng rng(cfg.seed);
    model.init_params(rng);
    Adam adam(cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
    auto params = model.params();

    std::vector<int> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    TrainResult result;
    if (metrics_out) *metrics_out << "epoch,batch,loss,accuracy\n";
    Tensor<float> batch, dlogits;
    std::vector<int> labels;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        int batch_idx = 0;
        int epoch_correct = 0;
        for (std::size_t begin = 0; begin < data.size();
             begin += static_cast<std::size_t>(cfg.batch), ++batch_idx) {
            const std::size_t end =
                std::min(data.size(), begin + static_cast<std::size_t>(cfg.batch));
            fill_batch(data, order, begin, end, batch, labels);
            const Tensor<float>& probs = model.forward(batch, Phase::train, true);
            const double loss = cross_entropy_loss(probs, labels);
            if (!std::isfinite(loss)) throw DivergenceError(epoch, batch_idx);
            const int correct = correct_count(probs, labels);
            epoch_correct += correct;
            const double acc = static_cast<double>(correct) / static_cast<double>(end - begin);

            softmax_ce_grad(probs, labels, dlogits);
            model.backward_from_logits(dlogits);
            adam.step(params);

            result.metrics.push_back({epoch, batch_idx, loss, acc});
            if (metrics_out)
                *metrics_out << epoch << ',' << batch_idx << ',' << loss << ',' << acc << '\n';
        }
        result.final_train_accuracy =
            static_cast<double>(epoch_correct) / static_cast<double>(data.size());
    }

    if (cfg.recalibrate_stats) {
        model.begin_stat_capture();
        for (std::size_t begin = 0; begin < data.size();
             begin += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end =
                std::min(data.size(), begin + static_cast<std::size_t>(cfg.batch));
            fill_batch(data, order, begin, end, batch, labels);
            model.forward(batch, Phase::train, false);
            model.accumulate_stats();
        }
        model.commit_stats();
    }
    return result;
}

double evaluate_accuracy(Network<float>& model, const std::vector<LabeledImage>& data,
                         int batch) {
    if (data.empty()) throw DataError("evaluation set is empty");
    std::vector<int> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Tensor<float> x;
    std::vector<int> labels;
    int correct = 0;
    for (std::size_t begin = 0; begin < data.size(); begin += static_cast<std::size_t>(batch)) {
        const std::size_t end = std::min(data.size(), begin + static_cast<std::size_t>(batch));
        fill_batch(data, order, begin, end, x, labels);
        correct += correct_count(model.forward(x, Phase::infer), labels);
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

KFoldResult kfold_evaluate(const LoweredNet& net, const std::vector<LabeledImage>& data, int k,
                           const TrainConfig& cfg) {
    if (k < 2) throw DataError("k-fold evaluation needs k >= 2");
    if (data.size() < static_cast<std::size_t>(k))
        throw DataError("k-fold evaluation needs at least k samples");

    // Stratified assignment: per class, shuffle then deal round-robin.
    int n_classes = 0;
    for (const LabeledImage& img : data) n_classes = std::max(n_classes, img.label + 1);
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < data.size(); ++i)
        by_class[static_cast<std::size_t>(data[i].label)].push_back(static_cast<int>(i));
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<int> fold_of(data.size(), 0);
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i)
            fold_of[static_cast<std::size_t>(members[i])] = static_cast<int>(i) % k;
    }

    KFoldResult result;
    for (int fold = 0; fold < k; ++fold) {
        std::vector<LabeledImage> train_set, test_set;
        for (std::size_t i = 0; i < data.size(); ++i)
            (fold_of[i] == fold ? test_set : train_set).push_back(data[i]);
        std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
        for (const LabeledImage& img : test_set) seen[static_cast<std::size_t>(img.label)] = true;
        for (int c = 0; c < n_classes; ++c)
            if (!seen[static_cast<std::size_t>(c)])
                std::cerr << "warning: fold " << fold << " holds out no sample of class " << c
                          << "\n";

        Network<float> model(net);
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = cfg.seed + static_cast<std::uint64_t>(fold);
        train(model, train_set, fold_cfg, nullptr);
        result.fold_accuracy.push_back(
            test_set.empty() ? 0.0 : evaluate_accuracy(model, test_set, cfg.batch));
    }

    double sum = 0.0;
    for (double a : result.fold_accuracy) sum += a;
    result.mean = sum / k;
    double var = 0.0;
    for (double a : result.fold_accuracy) var += (a - result.mean) * (a - result.mean);
    result.stddev = std::sqrt(var / k);
    return result;
}

}  // namespace tnet
