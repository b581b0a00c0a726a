#include <gtest/gtest.h>

#include <algorithm>

#include "oclads/device.hpp"
#include "oclads/random.hpp"
#include "oclads/stream.hpp"

using namespace oclads;

namespace {

// Straight reading of the rule: count the qualifying scores, apply the floor,
// never exceed the batch.
std::size_t brute_force_count(const std::vector<double>& scores, double s_th, int k_min) {
    std::size_t above = 0;
    for (double s : scores)
        if (s >= s_th) ++above;
    return std::min(scores.size(), std::max(static_cast<std::size_t>(k_min), above));
}

Batch random_batch(int round, int n, int dim, Rng& rng) {
    Batch b;
    b.round = round;
    for (int k = 0; k < n; ++k) {
        Sample s;
        s.features.resize(static_cast<std::size_t>(dim));
        for (double& v : s.features) v = rng.normal();
        s.label = rng.bernoulli(0.1) ? 1 : 0;
        s.round = round;
        s.index_in_batch = k;
        b.samples.push_back(std::move(s));
    }
    return b;
}

}  // namespace

TEST(SelectionCount, FallbackAndWholeBatch) {
    std::vector<double> low(64, 0.1);
    EXPECT_EQ(selection_count(low, 0.25, 15), 15u);
    std::vector<double> high(64, 0.9);
    EXPECT_EQ(selection_count(high, 0.25, 15), 64u);
}

TEST(SelectionCount, ThreeAboveThreshold) {
    std::vector<double> scores{0.9, 0.3, 0.26, 0.24, 0.1};
    scores.resize(64, 0.05);
    EXPECT_EQ(selection_count(scores, 0.25, 2), 3u);
}

TEST(SelectionCount, MatchesBruteForce) {
    Rng rng(77);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(80));
        std::vector<double> scores(static_cast<std::size_t>(n));
        for (double& s : scores) s = rng.uniform();
        // Put some mass exactly on the threshold.
        if (trial % 3 == 0) scores[0] = 0.25;
        std::sort(scores.rbegin(), scores.rend());
        const int k_min = static_cast<int>(rng.index(30));
        ASSERT_EQ(selection_count(scores, 0.25, k_min), brute_force_count(scores, 0.25, k_min));
    }
}

TEST(RankByScore, DescendingAndStable) {
    const std::vector<double> scores{0.2, 0.7, 0.2, 0.9, 0.7};
    EXPECT_EQ(rank_by_score(scores), (std::vector<std::size_t>{3, 1, 4, 0, 2}));
}

TEST(Device, SymmetricModelScoresHalf) {
    Rng rng(3);
    Device device(ModelParams::zeros(4, 3), {});
    const auto batch = random_batch(1, 20, 4, rng);
    const auto result = device.infer_batch(batch);
    ASSERT_EQ(result.scores.size(), 20u);
    for (std::size_t k = 0; k < 20; ++k) {
        EXPECT_DOUBLE_EQ(result.scores[k], 0.5);
        EXPECT_EQ(result.predictions[k], 0);
    }
}

TEST(Device, SelectsTopScoresAfterCalibration) {
    Rng rng(4);
    Device device(ModelParams::random_init(4, 6, rng), {});
    const auto batch = random_batch(11, 64, 4, rng);
    const auto inference = device.infer_batch(batch);
    const auto payload = device.select_samples(batch, inference.scores);

    auto sorted = inference.scores;
    std::sort(sorted.rbegin(), sorted.rend());
    const auto k = brute_force_count(sorted, 0.25, 15);
    ASSERT_EQ(payload.selected.size(), k);
    ASSERT_EQ(payload.scores.size(), k);
    EXPECT_EQ(payload.round, 11);
    EXPECT_TRUE(std::is_sorted(payload.scores.rbegin(), payload.scores.rend()));
    // Every unsent sample scores no higher than every sent one.
    const double cutoff = payload.scores.back();
    for (std::size_t j = 0; j < batch.samples.size(); ++j) {
        const bool sent = std::any_of(payload.selected.begin(), payload.selected.end(), [&](const Sample& s) {
            return s.index_in_batch == batch.samples[j].index_in_batch;
        });
        if (!sent) EXPECT_LE(inference.scores[j], cutoff);
    }
    for (std::size_t j = 0; j < k; ++j)
        EXPECT_EQ(payload.scores[j], inference.scores[static_cast<std::size_t>(payload.selected[j].index_in_batch)]);
}

TEST(Device, CalibrationSendsWholeBatch) {
    Rng rng(5);
    Device device(ModelParams::random_init(4, 6, rng), {});
    for (int round = 1; round <= 10; ++round) {
        const auto batch = random_batch(round, 64, 4, rng);
        const auto payload = device.select_samples(batch, device.infer_batch(batch).scores);
        EXPECT_EQ(payload.selected.size(), 64u);
    }
}

TEST(Device, InstallChangesPredictions) {
    Rng rng(6);
    Device device(ModelParams::zeros(4, 3), {});
    auto replacement = ModelParams::zeros(4, 3);
    replacement.b2 = {0.0, 5.0};
    const auto batch = random_batch(1, 10, 4, rng);
    device.install_model(serialize_model(replacement));
    EXPECT_EQ(device.installed_model(), replacement);
    for (int label : device.infer_batch(batch).predictions) EXPECT_EQ(label, 1);
}

TEST(Device, FailedInstallKeepsModel) {
    Rng rng(7);
    const auto original = ModelParams::random_init(4, 3, rng);
    Device device(original, {});
    EXPECT_THROW(device.install_model(serialize_model(ModelParams::zeros(5, 3))), ModelFormatError);
    EXPECT_THROW(device.install_model("{"), ModelFormatError);
    EXPECT_EQ(device.installed_model(), original);
}
