#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace upk {

// Pinhole camera parameters. Pixel (u, v) has its center at integer
// coordinates; x points right, y down, z forward.
struct CameraIntrinsics {
    double fx = 525.0;
    double fy = 525.0;
    double cx = 319.5;
    double cy = 239.5;
    int width = 640;
    int height = 480;

    // Throws SchemaError when focal lengths or sizes are out of range or any
    // value is non-finite.
    void validate() const;

    friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

// Row-major binary raster; nonzero bytes are object pixels.
class BitMask {
public:
    BitMask() = default;
    BitMask(int width, int height);
    BitMask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return bits_.size(); }

    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool value) { bits_[index(x, y)] = value ? 1 : 0; }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }

    std::size_t count() const;
    bool empty() const { return count() == 0; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    friend bool operator==(const BitMask&, const BitMask&) = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Metric depth in meters. 0 or non-finite means no measurement.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(int width, int height);
    DepthMap(int width, int height, std::vector<double> depth);

    int width() const { return width_; }
    int height() const { return height_; }

    double at(int x, int y) const { return depth_[static_cast<std::size_t>(y) * width_ + x]; }
    void set(int x, int y, double z) { depth_[static_cast<std::size_t>(y) * width_ + x] = z; }
    bool valid(int x, int y) const;
    const std::vector<double>& values() const { return depth_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> depth_;
};

bool is_valid_depth(double z);

// Chebyshev (square structuring element) dilation for radius > 0, erosion for
// radius < 0. Pixels outside the raster count as background.
BitMask dilate(const BitMask& mask, int radius);

} // namespace upk
