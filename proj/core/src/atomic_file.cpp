#include "upk/atomic_file.hpp"

#include "upk/error.hpp"

#include <atomic>
#include <cstdio>
#include <string>
#include <system_error>
#include <unistd.h>

namespace upk {

namespace fs = std::filesystem;

namespace {

fs::path temp_sibling(const fs::path& path)
{
    static std::atomic<unsigned long> counter{0};
    auto name = path.filename().string();
    name = "." + name + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    return path.parent_path() / name;
}

} // namespace

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }

    const fs::path tmp = temp_sibling(path);
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f)
        throw IoError("cannot open " + tmp.string() + " for writing");
    const bool ok = std::fwrite(bytes.data(), 1, bytes.size(), f) == bytes.size() && std::fflush(f) == 0;
    if (std::fclose(f) != 0 || !ok) {
        fs::remove(tmp, ec);
        throw IoError("failed writing " + path.string());
    }

    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string() + ": " + ec.message());
    }
}

void write_file_atomic(const fs::path& path, std::string_view text)
{
    write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace upk
