#include "support.hpp"

#include "upk/error.hpp"
#include "upk/seg_metrics.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace upk;
using test::rect_mask;

namespace {

// Two 2x2 squares on a 4x4 grid, shifted by one column so they share two pixels.
std::pair<BitMask, BitMask> half_overlap()
{
    return {rect_mask(4, 4, 0, 0, 2, 2), rect_mask(4, 4, 1, 0, 3, 2)};
}

FrameScore score(std::size_t frame, double dsc, std::size_t area, std::size_t gt_area = 1000)
{
    return {frame, "spoon", dsc, dsc, area, gt_area};
}

} // namespace

TEST(Dice, Examples)
{
    const auto a = rect_mask(4, 4, 0, 0, 2, 2);
    EXPECT_EQ(dice(a, a), 1.0);
    EXPECT_EQ(dice(a, rect_mask(4, 4, 2, 2, 4, 4)), 0.0);
    const auto [p, q] = half_overlap();
    EXPECT_EQ(overlap(p, q).both, 2u);
    EXPECT_EQ(dice(p, q), 0.5);
}

TEST(Dice, EmptyConventions)
{
    const BitMask e(4, 4);
    EXPECT_EQ(dice(e, e), 1.0);
    EXPECT_EQ(iou(e, e), 1.0);
    const auto a = rect_mask(4, 4, 0, 0, 1, 1);
    EXPECT_EQ(dice(e, a), 0.0);
    EXPECT_EQ(iou(a, e), 0.0);
}

TEST(Dice, DimensionMismatch)
{
    EXPECT_THROW(dice(BitMask(3, 3), BitMask(3, 4)), DimensionMismatch);
    EXPECT_THROW(iou(BitMask(3, 3), BitMask(4, 3)), DimensionMismatch);
}

TEST(Iou, Examples)
{
    const auto a = rect_mask(4, 4, 0, 0, 2, 2);
    EXPECT_EQ(iou(a, a), 1.0);
    EXPECT_EQ(iou(a, rect_mask(4, 4, 2, 2, 4, 4)), 0.0);
    const auto [p, q] = half_overlap();
    EXPECT_EQ(iou(p, q), 2.0 / 6.0);
}

TEST(DiceProperty, OracleSymmetryRangeOrdering)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> side(1, 16);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const int w = side(rng), h = side(rng);
        const auto a = test::random_mask(rng, w, h, density(rng));
        const auto b = test::random_mask(rng, w, h, density(rng));
        const double d = dice(a, b), j = iou(a, b);
        ASSERT_EQ(d, test::oracle_dice(a, b));
        ASSERT_EQ(d, dice(b, a));
        ASSERT_EQ(j, iou(b, a));
        ASSERT_GE(d, 0.0);
        ASSERT_LE(d, 1.0);
        ASSERT_GE(j, 0.0);
        ASSERT_LE(j, 1.0);
        ASSERT_LE(j, d);
        if (d == 0.0 || d == 1.0)
            ASSERT_EQ(j, d);
        else
            ASSERT_LT(j, d);
    }
}

TEST(ScoreSequence, PerfectAndEmptyPrediction)
{
    std::map<std::size_t, BitMask> gt, pred;
    for (std::size_t f = 0; f < 3; ++f)
        gt[f] = pred[f] = rect_mask(5, 5, 0, 0, 2, 3);
    for (const auto& s : score_sequence(pred, gt, "spoon"))
        EXPECT_EQ(s.dsc, 1.0);

    pred[1] = BitMask(5, 5);
    const auto scores = score_sequence(pred, gt, "spoon");
    ASSERT_EQ(scores.size(), 3u);
    EXPECT_EQ(scores[1].frame, 1u);
    EXPECT_EQ(scores[1].dsc, 0.0);
    EXPECT_EQ(scores[1].pred_area, 0u);
    EXPECT_EQ(scores[1].gt_area, 6u);
}

TEST(ScoreSequence, FrameSetMismatchListsDifference)
{
    std::map<std::size_t, BitMask> gt{{0, BitMask(2, 2)}, {1, BitMask(2, 2)}};
    std::map<std::size_t, BitMask> pred{{0, BitMask(2, 2)}, {5, BitMask(2, 2)}};
    try {
        score_sequence(pred, gt, "spoon");
        FAIL();
    } catch (const FrameSetMismatch& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find('1'), std::string::npos);
        EXPECT_NE(msg.find('5'), std::string::npos);
    }
}

TEST(Aggregate, Means)
{
    auto a = aggregate({score(0, 1.0, 1), score(1, 0.5, 1)}, "m");
    EXPECT_EQ(a.mean_dsc, 0.75);
    EXPECT_EQ(a.frame_count, 2u);
    EXPECT_EQ(a.model_id, "m");
    EXPECT_EQ(a.label, "spoon");

    std::vector<FrameScore> spoon(387, score(0, 0.9286, 1));
    for (std::size_t i = 0; i < spoon.size(); ++i)
        spoon[i].frame = i;
    const auto row = aggregate(spoon, "cutie");
    EXPECT_EQ(row.frame_count, 387u);
    EXPECT_NEAR(row.mean_dsc, 0.9286, 1e-12);
}

TEST(Aggregate, MatchesIndependentMean)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<FrameScore> s;
        std::vector<double> v;
        const int n = 1 + trial * 7;
        for (int i = 0; i < n; ++i) {
            v.push_back(u(rng));
            s.push_back(score(static_cast<std::size_t>(i), v.back(), 1));
        }
        long double sum = 0;
        for (double x : v)
            sum += x;
        EXPECT_NEAR(aggregate(s, "m").mean_dsc, static_cast<double>(sum / n), 1e-12);
    }
}

TEST(Aggregate, Errors)
{
    EXPECT_THROW(aggregate({}, "m"), EmptyInput);
    auto mixed = std::vector<FrameScore>{score(0, 1, 1), score(1, 1, 1)};
    mixed[1].label = "hand";
    EXPECT_THROW(aggregate(mixed, "m"), MixedLabels);
}

TEST(NonemptyGt, DropsAbsentFrames)
{
    const auto kept = nonempty_gt({score(0, 1.0, 0, 0), score(1, 0.5, 3, 4)});
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].frame, 1u);
}

TEST(MineFailures, LowDsc)
{
    std::vector<FrameScore> s{score(0, 0.9, 1000), score(1, 0.9, 1000), score(2, 0.2, 1000), score(3, 0.9, 1000)};
    const auto flags = mine_failures(s, 0.5, 3.0);
    ASSERT_EQ(flags.size(), 1u);
    EXPECT_EQ(flags[0].frame, 2u);
    EXPECT_EQ(flags[0].reason, FailureReason::low_dsc);
}

TEST(MineFailures, AreaDiscontinuity)
{
    std::vector<FrameScore> s{score(0, 1, 1000), score(1, 1, 1005), score(2, 1, 80), score(3, 1, 1002)};
    const auto flags = mine_failures(s, 0.5, 3.0);
    ASSERT_EQ(flags.size(), 2u);
    EXPECT_EQ(flags[0].frame, 2u);
    EXPECT_EQ(flags[1].frame, 3u);
    EXPECT_EQ(flags[0].reason, FailureReason::area_discontinuity);
    EXPECT_EQ(flags[1].reason, FailureReason::area_discontinuity);
}

TEST(MineFailures, CleanSeriesAndEmptyPrediction)
{
    std::vector<FrameScore> clean(10, score(0, 1.0, 500));
    for (std::size_t i = 0; i < clean.size(); ++i)
        clean[i].frame = i;
    EXPECT_TRUE(mine_failures(clean).empty());

    std::vector<FrameScore> s{score(0, 1, 500), score(1, 0, 0, 500)};
    const auto flags = mine_failures(s, 0.5, 3.0);
    std::set<FailureReason> reasons;
    for (const auto& f : flags) {
        EXPECT_EQ(f.frame, 1u);
        reasons.insert(f.reason);
    }
    EXPECT_TRUE(reasons.count(FailureReason::empty_prediction));
    EXPECT_TRUE(reasons.count(FailureReason::low_dsc));
}

TEST(MineFailures, BadThresholds)
{
    const std::vector<FrameScore> s{score(0, 1, 1)};
    EXPECT_THROW(mine_failures(s, -0.1, 3.0), BadThreshold);
    EXPECT_THROW(mine_failures(s, 1.5, 3.0), BadThreshold);
    EXPECT_THROW(mine_failures(s, 0.5, 1.0), BadThreshold);
    EXPECT_THROW(mine_failures(s, 0.5, std::nan("")), BadThreshold);
}
