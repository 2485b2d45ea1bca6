#include "upk/png_codec.hpp"

#include "upk/error.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace upk::png {

namespace {

[[noreturn]] void on_error(png_structp, png_const_charp msg) { throw DecodeError(std::string("png: ") + msg); }

void on_warning(png_structp, png_const_charp) {}

struct ReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t n)
{
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->offset + n > cur->bytes.size())
        png_error(png, "truncated stream");
    std::memcpy(out, cur->bytes.data() + cur->offset, n);
    cur->offset += n;
}

void write_callback(png_structp png, png_bytep data, png_size_t n)
{
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

void flush_callback(png_structp) {}

class ReadHandle {
public:
    ReadHandle()
    {
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_error, on_warning);
        if (!png_)
            throw DecodeError("png: cannot allocate reader");
        info_ = png_create_info_struct(png_);
        if (!info_) {
            png_destroy_read_struct(&png_, nullptr, nullptr);
            throw DecodeError("png: cannot allocate info");
        }
    }
    ~ReadHandle() { png_destroy_read_struct(&png_, &info_, nullptr); }
    ReadHandle(const ReadHandle&) = delete;
    ReadHandle& operator=(const ReadHandle&) = delete;

    png_structp png() const { return png_; }
    png_infop info() const { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

class WriteHandle {
public:
    WriteHandle()
    {
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_error, on_warning);
        if (!png_)
            throw IoError("png: cannot allocate writer");
        info_ = png_create_info_struct(png_);
        if (!info_) {
            png_destroy_write_struct(&png_, nullptr);
            throw IoError("png: cannot allocate info");
        }
    }
    ~WriteHandle() { png_destroy_write_struct(&png_, &info_); }
    WriteHandle(const WriteHandle&) = delete;
    WriteHandle& operator=(const WriteHandle&) = delete;

    png_structp png() const { return png_; }
    png_infop info() const { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

std::vector<std::uint8_t> encode(int width, int height, int color_type, int bit_depth, const std::uint8_t* rows_base, std::size_t row_bytes)
{
    if (width < 1 || height < 1)
        throw IoError("png: cannot encode an empty image");
    std::vector<std::uint8_t> out;
    WriteHandle h;
    png_set_write_fn(h.png(), &out, write_callback, flush_callback);
    png_set_IHDR(h.png(), h.info(), static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(h.png(), 6);
    png_write_info(h.png(), h.info());
    for (int y = 0; y < height; ++y)
        png_write_row(h.png(), const_cast<png_bytep>(rows_base + static_cast<std::size_t>(y) * row_bytes));
    png_write_end(h.png(), nullptr);
    return out;
}

} // namespace

Image decode(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw DecodeError("not a PNG stream");

    ReadHandle h;
    ReadCursor cursor{bytes, 0};
    png_set_read_fn(h.png(), &cursor, read_callback);
    png_read_info(h.png(), h.info());

    Image img;
    img.width = static_cast<int>(png_get_image_width(h.png(), h.info()));
    img.height = static_cast<int>(png_get_image_height(h.png(), h.info()));
    img.bit_depth = png_get_bit_depth(h.png(), h.info());
    switch (png_get_color_type(h.png(), h.info())) {
    case PNG_COLOR_TYPE_GRAY: img.color = ColorType::gray; break;
    case PNG_COLOR_TYPE_GRAY_ALPHA: img.color = ColorType::gray_alpha; break;
    case PNG_COLOR_TYPE_RGB: img.color = ColorType::rgb; break;
    case PNG_COLOR_TYPE_RGB_ALPHA: img.color = ColorType::rgba; break;
    case PNG_COLOR_TYPE_PALETTE: img.color = ColorType::palette; break;
    default: throw DecodeError("png: unsupported color type");
    }
    if (img.bit_depth < 8)
        png_set_packing(h.png());
    if (png_get_interlace_type(h.png(), h.info()) != PNG_INTERLACE_NONE)
        png_set_interlace_handling(h.png());
    png_read_update_info(h.png(), h.info());

    img.channels = png_get_channels(h.png(), h.info());
    const std::size_t row_bytes = png_get_rowbytes(h.png(), h.info());
    std::vector<std::uint8_t> raw(row_bytes * img.height);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = raw.data() + static_cast<std::size_t>(y) * row_bytes;
    png_read_image(h.png(), rows.data());
    png_read_end(h.png(), nullptr);

    const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
    img.samples.resize(n);
    if (img.bit_depth == 16) {
        // PNG stores 16-bit samples big-endian.
        for (std::size_t i = 0; i < n; ++i)
            img.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            img.samples[i] = raw[i];
    }
    return img;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DecodeError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Image read(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    try {
        return decode(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_gray8(int width, int height, std::span<const std::uint8_t> pixels)
{
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw DimensionMismatch("png: pixel count does not match dimensions");
    return encode(width, height, PNG_COLOR_TYPE_GRAY, 8, pixels.data(), static_cast<std::size_t>(width));
}

std::vector<std::uint8_t> encode_gray16(int width, int height, std::span<const std::uint16_t> pixels)
{
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw DimensionMismatch("png: pixel count does not match dimensions");
    std::vector<std::uint8_t> be(pixels.size() * 2);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        be[2 * i] = static_cast<std::uint8_t>(pixels[i] >> 8);
        be[2 * i + 1] = static_cast<std::uint8_t>(pixels[i] & 0xff);
    }
    return encode(width, height, PNG_COLOR_TYPE_GRAY, 16, be.data(), static_cast<std::size_t>(width) * 2);
}

std::vector<std::uint8_t> encode_rgb8(int width, int height, std::span<const std::uint8_t> pixels)
{
    if (pixels.size() != static_cast<std::size_t>(width) * height * 3)
        throw DimensionMismatch("png: pixel count does not match dimensions");
    return encode(width, height, PNG_COLOR_TYPE_RGB, 8, pixels.data(), static_cast<std::size_t>(width) * 3);
}

} // namespace upk::png
