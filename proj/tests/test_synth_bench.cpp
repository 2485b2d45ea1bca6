#include "support.hpp"

#include "upk/error.hpp"
#include "upk/seg_metrics.hpp"
#include "upk/synth_bench.hpp"
#include "upk/trajectory_io.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace upk;
using std::numbers::pi;
using test::TempDir;

namespace {

PointCloud small_box()
{
    return make_object_cloud(ShapeSpec::box(0.06, 0.03, 0.015, 2.0e6), 3);
}

PoseTrajectory truth_of(const TrajectoryScript& s)
{
    PoseTrajectory t{"s", "spoon", {}};
    for (std::size_t f = 0; f < s.frame_count; ++f)
        t.entries.push_back({f, interpolate_pose(s, f)});
    return t;
}

std::vector<std::string> frame_bytes(const fs::path& dir, std::size_t frames)
{
    std::vector<std::string> out;
    for (std::size_t f = 0; f < frames; ++f)
        out.push_back(test::slurp(layout::mask(dir, "spoon", f)) + test::slurp(layout::depth(dir, f)));
    return out;
}

} // namespace

TEST(ObjectCloud, BoxSampleCount)
{
    const auto c = make_object_cloud(ShapeSpec::box(1, 1, 1, 1.0e4), 0);
    EXPECT_EQ(c.size(), 60000u);
    EXPECT_DOUBLE_EQ(surface_area(ShapeSpec::box(1, 1, 1, 1.0e4)), 6.0);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : c.points) {
        mean += p;
        ASSERT_LE(p.cwiseAbs().maxCoeff(), 0.5 + 1e-3);
    }
    EXPECT_LT((mean / c.size()).norm(), 1e-12);
}

TEST(ObjectCloud, Deterministic)
{
    const auto a = make_object_cloud(ShapeSpec::spoon(), 5);
    const auto b = make_object_cloud(ShapeSpec::spoon(), 5);
    const auto c = make_object_cloud(ShapeSpec::spoon(), 6);
    EXPECT_EQ(a.points, b.points);
    EXPECT_NE(a.points, c.points);
}

TEST(ObjectCloud, SpoonFirstAxisAlongHandle)
{
    const auto c = make_object_cloud(ShapeSpec::spoon(), 1);
    const auto p = pca_pose(c);
    EXPECT_GT(std::abs(p.rotation.col(0).x()), 0.999);
    EXPECT_GT(std::abs(p.rotation.col(2).z()), 0.99);
    const double area = surface_area(ShapeSpec::spoon());
    EXPECT_NEAR(static_cast<double>(c.size()), area * ShapeSpec::spoon().sample_density, 2.0);
}

TEST(ObjectCloud, BadSpecs)
{
    EXPECT_THROW(make_object_cloud(ShapeSpec::box(0, 1, 1, 1e4), 0), BadSpec);
    EXPECT_THROW(make_object_cloud(ShapeSpec::box(1, 1, 1, -1), 0), BadSpec);
    ShapeSpec s = ShapeSpec::spoon();
    s.dimensions = {0.01, 0.004, 0.02};
    EXPECT_THROW(make_object_cloud(s, 0), BadSpec);
    EXPECT_THROW(make_object_cloud(ShapeSpec::box(10, 10, 10, 1e6), 0), BadSpec);
}

TEST(Interpolate, KeyframesAndMidpoints)
{
    TrajectoryScript s;
    s.frame_count = 3;
    s.keyframes = {{0, Rotation::Identity(), {0, 0, 1}}, {2, test::rz(pi / 2), {0, 0, 3}}};
    EXPECT_EQ(interpolate_pose(s, 0).rotation, Rotation::Identity());
    EXPECT_EQ(interpolate_pose(s, 2).rotation, test::rz(pi / 2));
    const auto mid = interpolate_pose(s, 1);
    EXPECT_LT((mid.rotation - test::rz(pi / 4)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((mid.translation - Eigen::Vector3d(0, 0, 2)).norm(), 1e-15);
    EXPECT_THROW(interpolate_pose(s, 3), OutOfRange);
}

TEST(Interpolate, ConstantAngularVelocity)
{
    const auto s = eating_script(120);
    for (std::size_t f = 1; f + 1 < 30; ++f) {
        const auto a = interpolate_pose(s, f - 1), b = interpolate_pose(s, f), c = interpolate_pose(s, f + 1);
        EXPECT_NEAR(rotation_geodesic(a.rotation, b.rotation), rotation_geodesic(b.rotation, c.rotation), 1e-9);
    }
}

TEST(Script, Validation)
{
    EXPECT_NO_THROW(eating_script(120).validate());
    EXPECT_NO_THROW(eating_script(5).validate());
    EXPECT_THROW(eating_script(4), BadSpec);
    TrajectoryScript s;
    s.frame_count = 10;
    s.keyframes = {{0, Rotation::Identity(), {0, 0, 1}}, {9, test::rz(pi / 2 + 0.01), {0, 0, 1}}};
    EXPECT_THROW(s.validate(), BadSpec);
    s.keyframes[1].frame = 8;
    s.keyframes[1].rotation = Rotation::Identity();
    EXPECT_THROW(s.validate(), BadSpec);
}

TEST(RenderFrame, ZBufferProperty)
{
    const auto cloud = small_box();
    const CameraIntrinsics k;
    const Pose pose{axis_angle(Eigen::Vector3d(1, 1, 0).normalized(), 0.7), Eigen::Vector3d(0.01, 0, 0.4)};
    RenderOptions opt;
    opt.background_depth = 0;
    const auto frame = render_frame(cloud, pose, k, opt);
    std::vector<double> zmin(frame.depth.size(), std::numeric_limits<double>::infinity());
    for (const auto& p : cloud.points) {
        const auto q = pose.apply(p);
        const auto px = project(q, k);
        const long u = std::lround(px.u), v = std::lround(px.v);
        auto& z = zmin[static_cast<std::size_t>(v) * k.width + u];
        z = std::min(z, q.z());
    }
    std::size_t covered = 0;
    for (std::size_t i = 0; i < zmin.size(); ++i) {
        const bool hit = std::isfinite(zmin[i]);
        ASSERT_EQ(frame.mask[i], hit);
        if (!hit) {
            ASSERT_EQ(frame.depth[i], 0);
            continue;
        }
        ++covered;
        ASSERT_LE(frame.depth[i] * opt.depth_scale, zmin[i] + opt.depth_scale);
        ASSERT_NEAR(frame.depth[i] * opt.depth_scale, zmin[i], opt.depth_scale / 2 + 1e-12);
    }
    EXPECT_GT(covered, 100u);
}

TEST(RenderFrame, BackdropFillsBackground)
{
    const auto frame = render_frame(small_box(), Pose{Rotation::Identity(), {0, 0, 0.5}}, CameraIntrinsics{});
    for (std::size_t i = 0; i < frame.depth.size(); ++i)
        if (!frame.mask[i])
            ASSERT_EQ(frame.depth[i], 1200);
}

TEST(Quantize, Rounding)
{
    EXPECT_EQ(quantize_depth(1.5, 0.001), 1500);
    EXPECT_EQ(quantize_depth(1.5004, 0.001), 1500);
    EXPECT_EQ(quantize_depth(0.0, 0.001), 0);
    EXPECT_EQ(quantize_depth(100.0, 0.001), 65535);
    EXPECT_EQ(quantize_depth(1e-6, 0.001), 1);
}

TEST(RenderSequence, StaticPoseFramesAreIdentical)
{
    TempDir dir;
    const auto script = static_script(4, test::rz(0.3), {0, 0, 0.5});
    const auto m = render_sequence(small_box(), script, CameraIntrinsics{}, {}, 1, dir.path());
    EXPECT_EQ(m.frame_count, 4u);
    const auto bytes = frame_bytes(dir.path(), 4);
    for (const auto& b : bytes)
        EXPECT_EQ(b, bytes[0]);
    EXPECT_TRUE(validate_sequence(load_manifest(layout::manifest(dir.path()))).empty());
}

TEST(RenderSequence, DeterministicGivenSeed)
{
    TempDir a, b, c;
    CorruptionSpec corr;
    corr.depth_noise_sigma = 0.002;
    corr.depth_dropout = 0.1;
    const auto script = eating_script(6);
    render_sequence(small_box(), script, CameraIntrinsics{}, corr, 11, a.path());
    render_sequence(small_box(), script, CameraIntrinsics{}, corr, 11, b.path());
    render_sequence(small_box(), script, CameraIntrinsics{}, corr, 12, c.path());
    EXPECT_EQ(frame_bytes(a.path(), 6), frame_bytes(b.path(), 6));
    EXPECT_NE(frame_bytes(a.path(), 6), frame_bytes(c.path(), 6));
    EXPECT_EQ(test::slurp(a / "manifest.json"), test::slurp(b / "manifest.json"));
    EXPECT_EQ(test::slurp(layout::truth_trajectory(a.path(), "spoon")),
              test::slurp(layout::truth_trajectory(b.path(), "spoon")));
}

TEST(RenderSequence, OcclusionAndGroundTruth)
{
    TempDir dir;
    CorruptionSpec corr;
    corr.occlusion_windows = {{4, 6, OcclusionKind::empty, 0}, {8, 8, OcclusionKind::clip, 0.5}};
    const auto m = render_sequence(small_box(), eating_script(12), CameraIntrinsics{}, corr, 2, dir.path());
    const int w = m.intrinsics.width, h = m.intrinsics.height;
    for (std::size_t f = 0; f < 12; ++f) {
        const auto mask = load_mask(m.frames[f].masks.at("spoon"), w, h);
        const auto gt = load_mask(m.frames[f].gt.at("spoon"), w, h);
        EXPECT_FALSE(gt.empty());
        if (f >= 4 && f <= 6) {
            EXPECT_TRUE(mask.empty()) << f;
        } else if (f == 8) {
            EXPECT_LT(mask.count(), gt.count());
            EXPECT_GT(mask.count(), 0u);
            EXPECT_EQ(overlap(mask, gt).both, mask.count());
        } else {
            EXPECT_EQ(dice(mask, gt), 1.0) << f;
        }
    }
    EXPECT_TRUE(validate_sequence(m).empty());
}

TEST(RenderSequence, DilationAndDropout)
{
    TempDir dir;
    CorruptionSpec corr;
    corr.mask_dilation = 2;
    corr.depth_dropout = 0.5;
    const auto m = render_sequence(small_box(), eating_script(5), CameraIntrinsics{}, corr, 2, dir.path());
    const int w = m.intrinsics.width, h = m.intrinsics.height;
    const auto mask = load_mask(m.frames[0].masks.at("spoon"), w, h);
    const auto gt = load_mask(m.frames[0].gt.at("spoon"), w, h);
    EXPECT_EQ(mask, dilate(gt, 2));
    const auto raw = load_depth_raw(m.frames[0].depth, w, h);
    const auto zeros = std::count(raw.begin(), raw.end(), 0);
    EXPECT_NEAR(static_cast<double>(zeros) / raw.size(), 0.5, 0.01);
}

TEST(RenderSequence, Errors)
{
    TempDir dir;
    const auto behind = static_script(2, Rotation::Identity(), {0, 0, -1});
    EXPECT_THROW(render_sequence(small_box(), behind, CameraIntrinsics{}, {}, 1, dir.path()), ObjectOutOfView);
    CorruptionSpec hidden;
    hidden.occlusion_windows = {{0, 1, OcclusionKind::empty, 0}};
    EXPECT_NO_THROW(render_sequence(small_box(), behind, CameraIntrinsics{}, hidden, 1, dir.path()));

    CorruptionSpec bad;
    bad.occlusion_windows = {{3, 9, OcclusionKind::empty, 0}};
    EXPECT_THROW(render_sequence(small_box(), eating_script(5), CameraIntrinsics{}, bad, 1, dir.path()), BadSpec);
    bad = {};
    bad.depth_dropout = 1.0;
    EXPECT_THROW(bad.validate(5), BadSpec);
    bad = {};
    bad.depth_noise_sigma = -1;
    EXPECT_THROW(bad.validate(5), BadSpec);
    RenderOptions opt;
    opt.depth_scale = 0;
    EXPECT_THROW(render_sequence(small_box(), eating_script(5), CameraIntrinsics{}, {}, 1, dir.path(), opt), ScaleError);
}

TEST(EvaluateRun, ExactAndOffsetEstimates)
{
    const auto truth = truth_of(eating_script(40));
    const auto zero = evaluate_run(truth, truth);
    EXPECT_EQ(zero.translation_rmse, 0.0);
    EXPECT_EQ(zero.rotation_max, 0.0);

    // A fixed offset between the estimator's object frame and the truth's.
    const Pose offset{axis_angle(Eigen::Vector3d(1, -2, 0.5).normalized(), 0.8), Eigen::Vector3d(0.02, -0.01, 0.03)};
    auto est = truth;
    for (auto& e : est.entries)
        e.pose = compose(e.pose, offset);
    const auto s = evaluate_run(est, truth);
    EXPECT_LT(s.translation_rmse, 1e-12);
    EXPECT_LT(s.rotation_max, 1e-7);
    EXPECT_EQ(s.frames_compared, 40u);
}

TEST(EvaluateRun, JitterMatchesSamplingOracle)
{
    const double sigma = 0.005;
    const std::size_t n = 20000;
    TrajectoryScript script = static_script(n, Rotation::Identity(), {0, 0, 0.5});
    const auto truth = truth_of(script);
    auto est = truth;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, sigma);
    double sq = 0.0;
    for (std::size_t f = 1; f < n; ++f) {
        const Eigen::Vector3d j(noise(rng), noise(rng), noise(rng));
        est.entries[f].pose.translation += j;
        sq += j.squaredNorm();
    }
    const double sampled = std::sqrt(sq / n);
    const auto s = evaluate_run(est, truth);
    EXPECT_NEAR(s.translation_rmse, sampled, 1e-12);
    EXPECT_NEAR(s.translation_rmse, std::sqrt(3.0) * sigma, 0.02 * std::sqrt(3.0) * sigma);
}

TEST(EvaluateRun, TruthFileAndMissingFrames)
{
    TempDir dir;
    const auto truth = truth_of(eating_script(10));
    save_trajectory(dir / "truth.jsonl", truth);
    EXPECT_EQ(evaluate_run(truth, dir / "truth.jsonl").translation_rmse, 0.0);
    auto est = truth;
    est.entries.push_back({10, Pose{}});
    EXPECT_THROW(evaluate_run(est, truth), FrameSetMismatch);
}

TEST(Bench, CleanSmallRun)
{
    TempDir dir;
    BenchConfig cfg;
    cfg.frame_count = 20;
    cfg.workdir = dir.path();
    const auto r = run_bench(cfg);
    EXPECT_EQ(r.statuses.tracked, 20u);
    EXPECT_TRUE(r.flips.empty());
    EXPECT_EQ(r.mean_dsc, 1.0);
    EXPECT_LT(r.stats.translation_rmse, 1e-3);
    ASSERT_EQ(r.translation_error.size(), 20u);
    EXPECT_EQ(r.translation_error[0], 0.0);
}
