#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "tnet/architectures.hpp"
#include "tnet/trainer.hpp"

using namespace tnet;

namespace {

// Small net that trains in well under a second.
NetworkDef mini_net(int classes = 3) {
    NetworkDef def;
    def.name = "mini";
    def.in_h = 12;
    def.in_w = 12;
    def.classes = classes;
    def.layers = {TinyLayer{4}, ConvLayer{1, 1, classes, Pad::same}, GapLayer{}, SoftmaxLayer{}};
    return def;
}

// Trivially separable three-class data: constant dark, mid, bright images
// with light noise.
std::vector<LabeledImage> shaded_images(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledImage> out;
    const float base[3] = {0.1f, 0.5f, 0.9f};
    for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < per_class; ++i) {
            LabeledImage img;
            img.pixels.resize(Shape{1, 1, 12, 12});
            img.label = k;
            for (auto& v : img.pixels.data)
                v = base[k] + 0.05f * static_cast<float>(rng.uniform(-1.0, 1.0));
            out.push_back(std::move(img));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("cross entropy of a one-hot match is near zero") {
    Tensor<float> probs(Shape{2, 3, 1, 1});
    probs.data = {0.98f, 0.01f, 0.01f, 0.2f, 0.5f, 0.3f};
    CHECK(cross_entropy_loss(probs, {0, 1}) ==
          doctest::Approx(-(std::log(0.98) + std::log(0.5)) / 2.0));
    CHECK_THROWS_AS(cross_entropy_loss(probs, {0, 5}), DataError);
    // zero probability is clamped, not infinite
    probs.data[3] = 1.0f;
    probs.data[4] = 0.0f;
    CHECK(std::isfinite(cross_entropy_loss(probs, {0, 1})));
}

TEST_CASE("fused softmax gradient sums to zero per sample") {
    Tensor<float> probs(Shape{2, 4, 1, 1});
    probs.data = {0.1f, 0.2f, 0.3f, 0.4f, 0.25f, 0.25f, 0.25f, 0.25f};
    Tensor<float> g;
    softmax_ce_grad(probs, {2, 0}, g);
    REQUIRE(g.shape == probs.shape);
    for (int n = 0; n < 2; ++n) {
        float sum = 0.0f;
        for (int c = 0; c < 4; ++c) sum += g.at(n, c, 0, 0);
        CHECK(sum == doctest::Approx(0.0f).epsilon(1e-6));
    }
    // the true-class entry is negative, scaled by the batch
    CHECK(g.at(0, 2, 0, 0) == doctest::Approx((0.3f - 1.0f) / 2.0f));
    CHECK(g.at(1, 0, 0, 0) == doctest::Approx((0.25f - 1.0f) / 2.0f));
}

TEST_CASE("adam takes the expected first step on a known gradient") {
    // one fake parameter with grad 2: first step is lr * mhat / (sqrt(vhat) + eps)
    Tensor<float> value(Shape{1, 1, 1, 1}), grad(Shape{1, 1, 1, 1});
    grad.data[0] = 2.0f;
    std::vector<ParamRef<float>> params{{"p", &value, &grad, true}};
    Adam opt(0.5, 0.9, 0.999, 1e-8);
    opt.step(params);
    CHECK(opt.steps_taken() == 1);
    // mhat = g, vhat = g*g exactly after bias correction at t=1
    CHECK(value.data[0] == doctest::Approx(-0.5 * 2.0 / (2.0 + 1e-8)).epsilon(1e-6));
    // non-trainable entries are left alone
    Tensor<float> stat(Shape{1, 1, 1, 1});
    stat.data[0] = 5.0f;
    std::vector<ParamRef<float>> with_stat{{"p", &value, &grad, true},
                                           {"s", &stat, nullptr, false}};
    Adam opt2(0.5, 0.9, 0.999, 1e-8);
    opt2.step(with_stat);
    CHECK(stat.data[0] == 5.0f);
}

TEST_CASE("loss falls over the first training steps on a pinned seed") {
    Network<float> model(lower(mini_net()));
    std::vector<LabeledImage> data = shaded_images(8, 21);
    TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.epochs = 40;
    cfg.batch = 8;
    cfg.seed = 2;
    std::ostringstream metrics;
    TrainResult result = train(model, data, cfg, &metrics);
    REQUIRE(result.metrics.size() == 40 * 3);
    CHECK(result.metrics.back().loss < result.metrics.front().loss);
    CHECK(result.final_train_accuracy > 0.9);
    CHECK(metrics.str().rfind("epoch,batch,loss,accuracy", 0) == 0);
}

TEST_CASE("training is deterministic for a fixed seed") {
    std::vector<LabeledImage> data = shaded_images(6, 22);
    TrainConfig cfg;
    cfg.lr = 0.02;
    cfg.epochs = 3;
    cfg.batch = 6;
    cfg.seed = 77;

    Network<float> m1(lower(mini_net())), m2(lower(mini_net()));
    TrainResult r1 = train(m1, data, cfg);
    TrainResult r2 = train(m2, data, cfg);
    REQUIRE(r1.metrics.size() == r2.metrics.size());
    for (std::size_t i = 0; i < r1.metrics.size(); ++i)
        CHECK(r1.metrics[i].loss == r2.metrics[i].loss);

    auto p1 = m1.params(), p2 = m2.params();
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].value->data == p2[i].value->data);
}

TEST_CASE("an absurd learning rate raises the divergence error") {
    Network<float> model(lower(mini_net()));
    std::vector<LabeledImage> data = shaded_images(6, 23);
    TrainConfig cfg;
    cfg.lr = 1e37;
    cfg.epochs = 3;
    cfg.batch = 6;
    cfg.seed = 3;
    CHECK_THROWS_AS(train(model, data, cfg), DivergenceError);
}

TEST_CASE("training rejects nonsense configurations") {
    Network<float> model(lower(mini_net()));
    std::vector<LabeledImage> data = shaded_images(2, 24);
    TrainConfig cfg;
    cfg.lr = 0.0;
    CHECK_THROWS_AS(train(model, data, cfg), DataError);
    cfg.lr = 0.01;
    cfg.batch = 0;
    CHECK_THROWS_AS(train(model, data, cfg), DataError);
    cfg.batch = 4;
    CHECK_THROWS_AS(train(model, {}, cfg), DataError);
}

TEST_CASE("inference statistics are recalibrated after training") {
    std::vector<LabeledImage> data = shaded_images(8, 25);
    TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.epochs = 20;
    cfg.batch = 8;
    cfg.seed = 5;

    Network<float> with(lower(mini_net())), without(lower(mini_net()));
    cfg.recalibrate_stats = true;
    train(with, data, cfg);
    cfg.recalibrate_stats = false;
    train(without, data, cfg);
    // the momentum average after 60 steps still remembers over half its
    // initialization, so the calibrated network scores at least as well
    CHECK(evaluate_accuracy(with, data) >= evaluate_accuracy(without, data));
    CHECK(evaluate_accuracy(with, data) > 0.9);
}

TEST_CASE("k-fold evaluation is stratified and reports fold spread") {
    std::vector<LabeledImage> data = shaded_images(10, 26);
    TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.epochs = 20;
    cfg.batch = 8;
    cfg.seed = 6;
    KFoldResult result = kfold_evaluate(lower(mini_net()), data, 5, cfg);
    REQUIRE(result.fold_accuracy.size() == 5);
    double mean = 0.0;
    for (double a : result.fold_accuracy) {
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        mean += a;
    }
    CHECK(result.mean == doctest::Approx(mean / 5.0));
    CHECK(result.stddev >= 0.0);
    // easy data: every fold should be solid
    CHECK(result.mean > 0.8);

    CHECK_THROWS_AS(kfold_evaluate(lower(mini_net()), data, 1, cfg), DataError);
    std::vector<LabeledImage> tiny(data.begin(), data.begin() + 3);
    CHECK_THROWS_AS(kfold_evaluate(lower(mini_net()), tiny, 5, cfg), DataError);
}
