#include "upk/geometry.hpp"
#include "upk/seg_metrics.hpp"
#include "upk/synth_bench.hpp"

#include <benchmark/benchmark.h>

#include <Eigen/Geometry>

#include <random>

using namespace upk;

namespace {

BitMask noise_mask(std::mt19937_64& rng, int w, int h)
{
    std::bernoulli_distribution on(0.3);
    BitMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            m.set(x, y, on(rng));
    return m;
}

PointCloud noise_cloud(std::mt19937_64& rng, std::size_t n)
{
    std::normal_distribution<double> g;
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i)
        c.points.emplace_back(3.0 * g(rng), g(rng), 0.2 * g(rng));
    return c;
}

void BM_Dice(benchmark::State& state)
{
    std::mt19937_64 rng(1);
    const int side = static_cast<int>(state.range(0));
    const auto a = noise_mask(rng, side, side);
    const auto b = noise_mask(rng, side, side);
    for (auto _ : state)
        benchmark::DoNotOptimize(dice(a, b));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Dice)->Arg(64)->Arg(480)->Arg(1024);

void BM_Kabsch(benchmark::State& state)
{
    std::mt19937_64 rng(2);
    const auto src = noise_cloud(rng, static_cast<std::size_t>(state.range(0)));
    const Rotation r = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    PointCloud dst = src;
    for (auto& p : dst.points)
        p = r * p + Eigen::Vector3d(0.1, -0.2, 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(kabsch(src, dst));
}
BENCHMARK(BM_Kabsch)->Arg(8)->Arg(1000)->Arg(100000);

void BM_PcaPose(benchmark::State& state)
{
    std::mt19937_64 rng(3);
    const auto cloud = noise_cloud(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(pca_pose(cloud));
}
BENCHMARK(BM_PcaPose)->Arg(1000)->Arg(100000);

void BM_MaskToCloud(benchmark::State& state)
{
    std::mt19937_64 rng(4);
    const CameraIntrinsics k;
    const auto mask = noise_mask(rng, k.width, k.height);
    const DepthMap depth(k.width, k.height, std::vector<double>(static_cast<std::size_t>(k.width) * k.height, 0.5));
    const auto stride = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(mask_to_cloud(mask, depth, k, stride));
}
BENCHMARK(BM_MaskToCloud)->Arg(1)->Arg(4);

void BM_RenderFrame(benchmark::State& state)
{
    const auto cloud = make_object_cloud(ShapeSpec::spoon(), 7);
    const auto script = eating_script(120);
    const CameraIntrinsics k;
    const Pose pose = interpolate_pose(script, 60);
    for (auto _ : state)
        benchmark::DoNotOptimize(render_frame(cloud, pose, k));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(cloud.points.size()));
}
BENCHMARK(BM_RenderFrame);

} // namespace

BENCHMARK_MAIN();
