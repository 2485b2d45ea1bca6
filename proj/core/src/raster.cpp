#include "upk/raster.hpp"

#include "upk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace upk {

void CameraIntrinsics::validate() const
{
    for (double v : {fx, fy, cx, cy})
        if (!std::isfinite(v))
            throw SchemaError("intrinsics: non-finite value");
    if (!(fx > 0.0) || !(fy > 0.0))
        throw SchemaError("intrinsics: fx and fy must be positive");
    if (width < 1 || height < 1)
        throw SchemaError("intrinsics: width and height must be at least 1");
}

BitMask::BitMask(int width, int height)
    : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0)
{
    if (width < 0 || height < 0)
        throw DimensionMismatch("mask dimensions must be non-negative");
}

BitMask::BitMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits))
{
    if (width < 0 || height < 0 || bits_.size() != static_cast<std::size_t>(width) * height)
        throw DimensionMismatch("mask bit count " + std::to_string(bits_.size()) + " does not match "
                                + std::to_string(width) + "x" + std::to_string(height));
    for (auto& b : bits_)
        b = b ? 1 : 0;
}

std::size_t BitMask::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

DepthMap::DepthMap(int width, int height)
    : width_(width), height_(height), depth_(static_cast<std::size_t>(width) * height, 0.0)
{
}

DepthMap::DepthMap(int width, int height, std::vector<double> depth)
    : width_(width), height_(height), depth_(std::move(depth))
{
    if (width < 0 || height < 0 || depth_.size() != static_cast<std::size_t>(width) * height)
        throw DimensionMismatch("depth value count does not match dimensions");
}

bool is_valid_depth(double z) { return std::isfinite(z) && z > 0.0; }

bool DepthMap::valid(int x, int y) const { return is_valid_depth(at(x, y)); }

BitMask dilate(const BitMask& mask, int radius)
{
    if (radius == 0)
        return mask;
    const int w = mask.width();
    const int h = mask.height();
    const int r = std::abs(radius);
    // Erosion is dilation of the complement; outside counts as background, so
    // for erosion the complement is padded with set pixels.
    const bool grow = radius > 0;
    auto src = [&](int x, int y) -> bool {
        if (x < 0 || y < 0 || x >= w || y >= h)
            return !grow;
        return mask.at(x, y) == grow;
    };

    // Separable max filter: horizontal then vertical.
    std::vector<std::uint8_t> horiz(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            for (int dx = -r; dx <= r && !hit; ++dx)
                hit = src(x + dx, y);
            horiz[static_cast<std::size_t>(y) * w + x] = hit;
        }

    BitMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                const int yy = y + dy;
                hit = (yy < 0 || yy >= h) ? !grow : horiz[static_cast<std::size_t>(yy) * w + x] != 0;
            }
            out.set(x, y, grow ? hit : !hit);
        }
    return out;
}

} // namespace upk
