#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>

namespace upk {

// Writes to a sibling temp file, flushes, then renames over `path`, so a
// reader never observes a partially written file. Parent directories are
// created as needed. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

} // namespace upk
