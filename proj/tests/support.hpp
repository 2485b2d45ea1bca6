#pragma once

#include "upk/geometry.hpp"
#include "upk/raster.hpp"
#include "upk/sequence_io.hpp"

#include <Eigen/Geometry>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

namespace upk::test {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = fs::temp_directory_path()
            / ("upk-test-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << text;
}

inline BitMask random_mask(std::mt19937_64& rng, int w, int h, double p)
{
    std::bernoulli_distribution on(p);
    BitMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            m.set(x, y, on(rng));
    return m;
}

inline BitMask rect_mask(int w, int h, int x0, int y0, int x1, int y1)
{
    BitMask m(w, h);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            m.set(x, y, true);
    return m;
}

// Per-pixel counting, independent of the library's overlap().
struct PixelCounts {
    long a = 0, b = 0, both = 0;
};

inline PixelCounts count_pixels(const BitMask& a, const BitMask& b)
{
    PixelCounts c;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            c.a += a.at(x, y);
            c.b += b.at(x, y);
            c.both += a.at(x, y) && b.at(x, y);
        }
    return c;
}

inline double oracle_dice(const BitMask& a, const BitMask& b)
{
    const auto c = count_pixels(a, b);
    if (c.a + c.b == 0)
        return 1.0;
    return static_cast<double>(2 * c.both) / static_cast<double>(c.a + c.b);
}

inline Rotation random_rotation(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return q.toRotationMatrix();
}

inline Eigen::Vector3d random_vector(std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng)};
}

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double scale)
{
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i)
        c.points.push_back(random_vector(rng, scale));
    return c;
}

inline PointCloud transformed(const PointCloud& c, const Rotation& r, const Eigen::Vector3d& t)
{
    PointCloud out = c;
    for (auto& p : out.points)
        p = r * p + t;
    return out;
}

inline Rotation rz(double radians)
{
    return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

// Small on-disk sequence: one label, masks equal to gt, depth 1000 units
// everywhere. The mask of frame f is a 3x2 rectangle at column f.
inline SequenceManifest make_sequence(const fs::path& dir, std::size_t frames, int w = 8, int h = 6,
                                      const std::string& label = "spoon")
{
    SequenceManifest m;
    m.sequence_id = "tiny";
    m.frame_count = frames;
    m.object_labels = {label};
    m.intrinsics = {10.0, 10.0, (w - 1) / 2.0, (h - 1) / 2.0, w, h};
    m.depth_scale = 0.001;
    m.root = dir;
    for (std::size_t f = 0; f < frames; ++f) {
        const int x0 = static_cast<int>(f) % (w - 2);
        const BitMask mask = rect_mask(w, h, x0, 1, x0 + 3, 3);
        write_mask(layout::mask(dir, label, f), mask);
        write_mask(layout::gt_mask(dir, label, f), mask);
        write_depth_raw(layout::depth(dir, f), w, h, std::vector<std::uint16_t>(static_cast<std::size_t>(w) * h, 1000));
        FrameEntry e;
        e.index = f;
        e.depth = layout::depth(dir, f);
        e.masks[label] = layout::mask(dir, label, f);
        e.gt[label] = layout::gt_mask(dir, label, f);
        m.frames.push_back(e);
    }
    save_manifest(m, layout::manifest(dir));
    return m;
}

} // namespace upk::test
