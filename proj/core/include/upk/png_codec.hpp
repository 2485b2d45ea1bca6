#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace upk::png {

enum class ColorType { gray, gray_alpha, rgb, rgba, palette };

// Decoded samples, row-major and channel-interleaved, widened to 16 bits.
struct Image {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    ColorType color = ColorType::gray;
    int channels = 1;
    std::vector<std::uint16_t> samples;
};

// Throws DecodeError on anything libpng rejects.
Image decode(std::span<const std::uint8_t> bytes);
Image read(const std::filesystem::path& path);

// Encoders emit no ancillary chunks, so output bytes depend only on pixels.
std::vector<std::uint8_t> encode_gray8(int width, int height, std::span<const std::uint8_t> pixels);
std::vector<std::uint8_t> encode_gray16(int width, int height, std::span<const std::uint16_t> pixels);
std::vector<std::uint8_t> encode_rgb8(int width, int height, std::span<const std::uint8_t> pixels);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

} // namespace upk::png
