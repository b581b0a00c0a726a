#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oclads/stream.hpp"

using namespace oclads;

namespace {

std::string csv_rows(int n, int dim) {
    std::string out;
    for (int r = 0; r < n; ++r) {
        for (int d = 0; d < dim; ++d) out += std::to_string(r * 0.5 + d) + ",";
        out += std::to_string(r % 2) + "\n";
    }
    return out;
}

}  // namespace

TEST(BuildSchedule, ZeroProbabilityGivesNoShifts) {
    for (std::uint64_t seed : {0u, 1u, 99u}) {
        EXPECT_TRUE(build_schedule(100, 0.0, 5, seed).entries.empty());
    }
}

TEST(BuildSchedule, DegenerateInputsGiveEmptySchedule) {
    EXPECT_TRUE(build_schedule(0, 0.5, 5, 1).entries.empty());
    EXPECT_TRUE(build_schedule(10, 1.5, 5, 1).entries.empty());
    EXPECT_TRUE(build_schedule(10, 0.5, 0, 1).entries.empty());
}

// With shift_prob = 1 every round draws a candidate; replay the draws and
// apply the acceptance rule by hand.
TEST(BuildSchedule, CertainCandidatesFollowAcceptanceRule) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto schedule = build_schedule(20, 1.0, 5, seed);

        Rng rng(seed);
        std::vector<ScheduleEntry> expected;
        Regime current;
        int last = -100;
        for (int round = 1; round <= 20; ++round) {
            ASSERT_TRUE(rng.bernoulli(1.0));
            const Regime drawn = regime_catalogue()[rng.index(7)];
            if (round - last >= 5 && !(drawn == current)) {
                expected.push_back({round, drawn});
                current = drawn;
                last = round;
            }
        }
        ASSERT_EQ(schedule.entries.size(), expected.size()) << "seed " << seed;
        for (std::size_t k = 0; k < expected.size(); ++k) {
            EXPECT_EQ(schedule.entries[k].round, expected[k].round);
            EXPECT_TRUE(schedule.entries[k].regime == expected[k].regime);
        }
        // Without rejections the rounds would be exactly {1, 6, 11, 16}.
        EXPECT_LE(schedule.entries.size(), 4u);
    }
}

TEST(BuildSchedule, GapAndDistinctRegimeInvariants) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto schedule = build_schedule(300, 0.3, 5, seed);
        Regime previous;
        int last_round = -1000;
        for (const auto& e : schedule.entries) {
            EXPECT_GE(e.round - last_round, 5);
            EXPECT_FALSE(e.regime == previous);
            EXPECT_TRUE(e.regime.severity == 0 || e.regime.severity == 3 || e.regime.severity == 5);
            previous = e.regime;
            last_round = e.round;
        }
    }
}

TEST(BuildSchedule, RegimePersistsUntilNextEntry) {
    const auto schedule = build_schedule(200, 0.2, 5, 11);
    ASSERT_FALSE(schedule.entries.empty());
    for (int round = 1; round <= 200; ++round) {
        Regime expected;
        for (const auto& e : schedule.entries) {
            if (e.round <= round) expected = e.regime;
        }
        EXPECT_TRUE(schedule.regime_at(round) == expected) << "round " << round;
    }
}

TEST(BuildSchedule, LongRunShiftCountIsInRange) {
    double total = 0.0;
    const int runs = 50;
    for (int seed = 0; seed < runs; ++seed) {
        total += static_cast<double>(build_schedule(755, 0.15, 5, seed).shift_rounds().size());
    }
    const double mean = total / runs;
    EXPECT_GT(mean, 40.0);
    EXPECT_LT(mean, 80.0);
}

TEST(ShiftSchedule, JsonRoundTrip) {
    const auto schedule = build_schedule(120, 0.3, 5, 4);
    const auto back = ShiftSchedule::from_json(schedule.to_json());
    ASSERT_EQ(back.entries.size(), schedule.entries.size());
    EXPECT_EQ(back.n_rounds, 120);
    for (std::size_t k = 0; k < back.entries.size(); ++k) {
        EXPECT_EQ(back.entries[k].round, schedule.entries[k].round);
        EXPECT_TRUE(back.entries[k].regime == schedule.entries[k].regime);
    }
}

TEST(ShiftSchedule, RoundOneEntryIsNotATransition) {
    ShiftSchedule s{30, {{1, {CorruptionKind::scale, 3}}, {9, {CorruptionKind::none, 0}}}};
    EXPECT_EQ(s.shift_rounds(), std::vector<int>{9});
}

TEST(NextBatch, ZeroAnomalyRateGivesNormalLabels) {
    Rng rng(3);
    const auto batch = next_batch(ShiftSchedule{5, {}}, 2, 64, 0.0, 16, rng);
    ASSERT_EQ(batch.samples.size(), 64u);
    for (const auto& s : batch.samples) {
        EXPECT_EQ(s.label, 0);
        EXPECT_EQ(s.round, 2);
    }
}

TEST(NextBatch, IdentityRegimeMatchesBaseDraw) {
    Rng a(8);
    Rng b(8);
    const auto batch = next_batch(ShiftSchedule{5, {}}, 1, 32, 0.3, 6, a);
    for (const auto& s : batch.samples) {
        const int label = b.bernoulli(0.3) ? 1 : 0;
        const Sample base = draw_base_sample(label, 6, b);
        EXPECT_EQ(s.label, label);
        EXPECT_EQ(s.features, base.features);
    }
}

TEST(NextBatch, AnomalyFractionConverges) {
    Rng rng(21);
    const ShiftSchedule none{1000, {}};
    long anomalies = 0;
    long total = 0;
    for (int round = 1; round <= 1000; ++round) {
        for (const auto& s : next_batch(none, round, 64, 0.07, 4, rng).samples) {
            anomalies += s.label;
            ++total;
        }
    }
    EXPECT_NEAR(static_cast<double>(anomalies) / total, 0.07, 0.01);
}

TEST(NextBatch, SameSeedSameStream) {
    const auto schedule = build_schedule(30, 0.3, 5, 2);
    SyntheticStream s1(schedule, {}, 77);
    SyntheticStream s2(schedule, {}, 77);
    for (int round = 1; round <= 30; ++round) {
        const auto b1 = s1.next(round);
        const auto b2 = s2.next(round);
        ASSERT_EQ(b1.samples.size(), b2.samples.size());
        for (std::size_t k = 0; k < b1.samples.size(); ++k) {
            EXPECT_EQ(b1.samples[k].features, b2.samples[k].features);
            EXPECT_EQ(b1.samples[k].label, b2.samples[k].label);
        }
    }
}

TEST(ApplyRegime, Transforms) {
    std::vector<double> x{1.0, 2.0, 3.0};

    auto y = x;
    apply_regime({CorruptionKind::shift_mean, 0}, y);
    EXPECT_EQ(y, x);

    y = x;
    apply_regime({CorruptionKind::shift_mean, 5}, y);
    EXPECT_NEAR(std::hypot(y[0] - x[0], y[1] - x[1]), 3.0, 1e-12);
    EXPECT_EQ(y[2], x[2]);

    y = x;
    apply_regime({CorruptionKind::shift_mean, 3}, y);
    EXPECT_NEAR(std::hypot(y[0] - x[0], y[1] - x[1]), 1.5, 1e-12);

    y = x;
    apply_regime({CorruptionKind::scale, 3}, y);
    EXPECT_NEAR(y[2], 3.0 * 1.15, 1e-12);

    y = x;
    apply_regime({CorruptionKind::rotate_pair, 5}, y);
    EXPECT_NEAR(std::hypot(y[0], y[1]), std::hypot(1.0, 2.0), 1e-12);
    EXPECT_NEAR(std::atan2(y[1], y[0]) - std::atan2(2.0, 1.0), M_PI / 6.0, 1e-12);
}

TEST(IngestStream, SplitsIntoBatches) {
    std::istringstream full(csv_rows(128, 3));
    const auto batches = ingest_stream(full, 64);
    ASSERT_EQ(batches.size(), 2u);
    EXPECT_EQ(batches[0].samples.size(), 64u);
    EXPECT_EQ(batches[1].samples.size(), 64u);
    EXPECT_EQ(batches[1].round, 2);
    EXPECT_EQ(batches[1].samples[5].index_in_batch, 5);

    std::istringstream ragged("f0,f1,f2,label\n" + csv_rows(130, 3));
    const auto tail = ingest_stream(ragged, 64);
    ASSERT_EQ(tail.size(), 3u);
    EXPECT_EQ(tail[2].samples.size(), 2u);
    EXPECT_EQ(tail[0].samples[1].features, (std::vector<double>{0.5, 1.5, 2.5}));
    EXPECT_EQ(tail[0].samples[1].label, 1);
}

TEST(IngestStream, NonNumericFeatureNamesTheLine) {
    std::istringstream in("1,2,0\n3,oops,1\n");
    try {
        ingest_stream(in, 4);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(IngestStream, RejectsBadRows) {
    std::istringstream mismatch("1,2,0\n3,4,5,1\n");
    EXPECT_THROW(ingest_stream(mismatch, 4), DimensionError);
    std::istringstream bad_label("1,2,0\n3,4,2\n");
    EXPECT_THROW(ingest_stream(bad_label, 4), ParseError);
}
