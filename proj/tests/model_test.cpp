#include <gtest/gtest.h>

#include <cmath>

#include "oclads/metrics.hpp"
#include "oclads/model.hpp"
#include "oclads/stream.hpp"

using namespace oclads;

namespace {

Sample make_sample(std::vector<double> x, int y) {
    Sample s;
    s.features = std::move(x);
    s.label = y;
    return s;
}

std::vector<Sample> random_minibatch(Rng& rng, int dim, int n, double spread = 1.5) {
    std::vector<Sample> out;
    for (int k = 0; k < n; ++k) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (double& v : x) v = spread * rng.normal();
        out.push_back(make_sample(std::move(x), rng.bernoulli(0.4) ? 1 : 0));
    }
    return out;
}

// Central differences over every parameter coordinate.
std::vector<double> numeric_gradient(const ModelParams& params, const std::vector<Sample>& batch,
                                     double gamma, double alpha, double h) {
    auto flat = params.flatten();
    std::vector<double> grad(flat.size());
    for (std::size_t k = 0; k < flat.size(); ++k) {
        const double saved = flat[k];
        flat[k] = saved + h;
        const double up = focal_loss(ModelParams::unflatten(params.input_dim, params.hidden_dim, flat),
                                     batch, gamma, alpha).loss;
        flat[k] = saved - h;
        const double down = focal_loss(
            ModelParams::unflatten(params.input_dim, params.hidden_dim, flat), batch, gamma, alpha).loss;
        flat[k] = saved;
        grad[k] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace

TEST(Predict, ZeroModelIsSymmetricAndPicksNormal) {
    const auto params = ModelParams::zeros(4, 3);
    const auto p = predict(params, std::vector<double>{1.0, -2.0, 3.0, 0.5});
    EXPECT_DOUBLE_EQ(p.softmax[0], 0.5);
    EXPECT_DOUBLE_EQ(p.softmax[1], 0.5);
    EXPECT_EQ(p.label, 0);
}

TEST(Predict, HandComputedSoftmax) {
    auto params = ModelParams::zeros(2, 2);
    params.b2 = {0.0, std::log(3.0)};
    const auto p = predict(params, std::vector<double>{0.3, -0.7});
    EXPECT_NEAR(p.softmax[0], 0.25, 1e-15);
    EXPECT_NEAR(p.softmax[1], 0.75, 1e-15);
    EXPECT_EQ(p.label, 1);
    EXPECT_DOUBLE_EQ(p.anomaly_score(), p.softmax[1]);
}

TEST(Predict, NormalizedAndFiniteForLargeInputs) {
    Rng rng(5);
    const auto params = ModelParams::random_init(8, 16, rng);
    auto big = params;
    for (double& v : big.w2) v *= 500.0;
    for (int k = 0; k < 100000; ++k) {
        std::vector<double> x(8);
        for (double& v : x) v = rng.uniform(-1000.0, 1000.0);
        const auto p = predict(k % 2 ? big : params, x);
        ASSERT_TRUE(std::isfinite(p.softmax[0]) && std::isfinite(p.softmax[1]));
        ASSERT_NEAR(p.softmax[0] + p.softmax[1], 1.0, 1e-9);
        ASSERT_GE(p.softmax[0], 0.0);
        ASSERT_GE(p.softmax[1], 0.0);
    }
}

TEST(Predict, DimensionMismatchThrows) {
    const auto params = ModelParams::zeros(4, 3);
    EXPECT_THROW(predict(params, std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST(FocalLoss, HandEvaluatedSingleSample) {
    auto params = ModelParams::zeros(2, 2);
    params.b2 = {0.0, std::log(0.6 / 0.4)};
    const std::vector<Sample> batch{make_sample({0.1, 0.2}, 1)};
    const double expected = -0.8 * std::pow(0.4, 2.0) * std::log(0.6);
    EXPECT_NEAR(focal_loss(params, batch, 2.0, 0.8).loss, expected, 1e-12);
    EXPECT_NEAR(expected, 0.06537, 1e-4);
}

TEST(FocalLoss, ReducesToHalfCrossEntropy) {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const auto params = ModelParams::random_init(5, 7, rng);
        const auto batch = random_minibatch(rng, 5, 12);
        double ce = 0.0;
        for (const auto& s : batch) ce -= std::log(predict(params, s.features).softmax[s.label]);
        ce /= static_cast<double>(batch.size());
        EXPECT_NEAR(focal_loss(params, batch, 0.0, 0.5).loss, 0.5 * ce, 1e-10);
    }
}

TEST(FocalLoss, ConfidentCorrectSampleCostsNothing) {
    auto params = ModelParams::zeros(2, 2);
    params.b2 = {0.0, 60.0};
    const std::vector<Sample> batch{make_sample({0.0, 0.0}, 1)};
    const auto lg = focal_loss(params, batch, 2.0, 0.8);
    EXPECT_NEAR(lg.loss, 0.0, 1e-20);
    for (double g : lg.gradient.flatten()) EXPECT_EQ(g, 0.0);
}

TEST(FocalLoss, GradientMatchesFiniteDifferences) {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto params = ModelParams::random_init(4, 6, rng);
        const auto batch = random_minibatch(rng, 4, 6);
        const double gamma = trial % 2 == 0 ? 2.0 : 0.5;
        const auto analytic = focal_loss(params, batch, gamma, 0.8).gradient.flatten();
        const auto numeric = numeric_gradient(params, batch, gamma, 0.8, 1e-5);
        for (std::size_t k = 0; k < analytic.size(); ++k) {
            const double err = std::abs(analytic[k] - numeric[k]);
            const double scale = std::max(std::abs(analytic[k]), std::abs(numeric[k]));
            EXPECT_TRUE(err < 1e-7 || err / scale < 1e-5)
                << "coordinate " << k << ": " << analytic[k] << " vs " << numeric[k];
        }
    }
}

TEST(FocalLoss, EmptyMinibatchThrows) {
    const auto params = ModelParams::zeros(2, 2);
    EXPECT_THROW(focal_loss(params, std::span<const Sample>{}, 2.0, 0.8), std::invalid_argument);
}

TEST(TrainSteps, ZeroLearningRateKeepsParams) {
    Rng init(1);
    const auto params = ModelParams::random_init(4, 5, init);
    Rng data(2);
    const auto pool = random_minibatch(data, 4, 20);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    Rng rng(3);
    EXPECT_EQ(train_steps(params, pool, cfg, rng), params);
}

TEST(TrainSteps, DeterministicForFixedSeed) {
    Rng init(1);
    const auto params = ModelParams::random_init(4, 5, init);
    Rng data(2);
    const auto pool = random_minibatch(data, 4, 40);
    Rng r1(10);
    Rng r2(10);
    const auto a = train_steps(params, pool, {}, r1);
    const auto b = train_steps(params, pool, {}, r2);
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    EXPECT_NE(a.fingerprint(), params.fingerprint());
}

TEST(TrainSteps, SmallStepsDescendOnRepeatedSample) {
    Rng init(4);
    auto params = ModelParams::random_init(3, 4, init);
    const std::vector<Sample> pool{make_sample({0.5, -1.0, 2.0}, 1)};
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.steps_per_batch = 1;
    Rng rng(0);
    double previous = focal_loss(params, pool, cfg.gamma_fl, cfg.alpha_fl).loss;
    for (int call = 0; call < 200; ++call) {
        params = train_steps(params, pool, cfg, rng);
        const double loss = focal_loss(params, pool, cfg.gamma_fl, cfg.alpha_fl).loss;
        ASSERT_LE(loss, previous);
        previous = loss;
    }
}

TEST(TrainSteps, EmptyPoolThrows) {
    Rng rng(1);
    EXPECT_THROW(train_steps(ModelParams::zeros(2, 2), {}, {}, rng), std::invalid_argument);
}

TEST(TrainReplaySteps, IncomingSamplesJoinEveryStep) {
    Rng init(6);
    const auto params = ModelParams::random_init(3, 4, init);
    Rng data(7);
    const auto incoming = random_minibatch(data, 3, 5);
    TrainConfig cfg;
    cfg.steps_per_batch = 1;
    cfg.minibatch_size = 4;
    Rng rng(8);
    // With an empty memory the single step is plain gradient descent on the
    // incoming samples.
    const auto stepped = train_replay_steps(params, incoming, {}, cfg, rng);
    const auto grad = focal_loss(params, incoming, cfg.gamma_fl, cfg.alpha_fl).gradient.flatten();
    auto expected = params.flatten();
    for (std::size_t k = 0; k < expected.size(); ++k) expected[k] -= cfg.learning_rate * grad[k];
    EXPECT_EQ(stepped.flatten(), expected);
}

TEST(Bootstrap, ImprovesOnTrainingSet) {
    Rng rng(12);
    const auto untrained = ModelParams::random_init(16, 32, rng);
    const auto dataset = make_bootstrap_set(16, 100, 20, rng);
    EXPECT_EQ(dataset.size(), 120u);
    EXPECT_EQ(std::count_if(dataset.begin(), dataset.end(), [](const Sample& s) { return s.label == 1; }),
              20);

    TrainConfig cfg;
    cfg.learning_rate = 0.15;
    Rng r1(13);
    Rng r2(13);
    const auto tuned = bootstrap_finetune(untrained, dataset, cfg, 200, r1);
    EXPECT_EQ(tuned, bootstrap_finetune(untrained, dataset, cfg, 200, r2));

    auto f1_of = [&](const ModelParams& p) {
        std::vector<int> truth;
        std::vector<int> pred;
        for (const auto& s : dataset) {
            truth.push_back(s.label);
            pred.push_back(predict(p, s.features).label);
        }
        return macro_f1(truth, pred);
    };
    EXPECT_GT(f1_of(tuned), f1_of(untrained));
}

TEST(Bootstrap, EmptyDatasetThrows) {
    Rng rng(1);
    EXPECT_THROW(bootstrap_finetune(ModelParams::zeros(2, 2), {}, {}, 10, rng), std::invalid_argument);
}

TEST(Serialization, RoundTripIsExact) {
    Rng rng(31);
    const auto params = ModelParams::random_init(7, 9, rng);
    const auto back = deserialize_model(serialize_model(params));
    EXPECT_EQ(back, params);
}

TEST(Serialization, RejectsMalformedPayloads) {
    EXPECT_THROW(deserialize_model("not json"), ModelFormatError);
    EXPECT_THROW(deserialize_model(R"({"format":"oclads-mlp","version":1,"input_dim":2,)"
                                   R"("hidden_dim":2,"output_dim":2,"values":[1,2,3]})"),
                 ModelFormatError);
    EXPECT_THROW(deserialize_model(R"({"format":"oclads-mlp","version":2,"input_dim":1,)"
                                   R"("hidden_dim":1,"output_dim":2,"values":[0,0,0,0,0,0,0]})"),
                 ModelFormatError);
}
