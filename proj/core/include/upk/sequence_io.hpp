#pragma once

#include "upk/raster.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace upk {

namespace fs = std::filesystem;

inline constexpr double kDefaultMaxDepth = 10.0;

// Files belonging to one frame. Paths are already resolved against the
// manifest's directory.
struct FrameEntry {
    std::size_t index = 0;
    std::optional<fs::path> rgb;
    fs::path depth;
    std::map<std::string, fs::path> masks;
    std::map<std::string, fs::path> gt;
    // Free-form; carried through but never interpreted.
    std::optional<double> timestamp;
    // Original index when the manifest was produced by frame filtering.
    std::optional<std::size_t> source_index;
};

struct SequenceManifest {
    std::string sequence_id;
    std::size_t frame_count = 0;
    std::vector<std::string> object_labels;
    CameraIntrinsics intrinsics;
    double depth_scale = 0.001;
    // frames[i].index == i
    std::vector<FrameEntry> frames;
    // Opaque JSON object (adapter provenance etc.); empty when absent.
    std::string metadata_json;
    // Directory the on-disk relative paths were resolved against.
    fs::path root;

    bool has_label(std::string_view label) const;
};

// Throws ParseError, SchemaError or ConsistencyError.
SequenceManifest load_manifest(const fs::path& path);
SequenceManifest parse_manifest(std::string_view text, const fs::path& root);

// Paths are written relative to the directory that will hold the document.
std::string serialize_manifest(const SequenceManifest& manifest, const fs::path& document_dir);
void save_manifest(const SequenceManifest& manifest, const fs::path& path);

// Canonical on-disk layout of a sequence directory.
namespace layout {
std::string frame_file(std::size_t frame);
fs::path manifest(const fs::path& seq);
fs::path mask(const fs::path& seq, std::string_view label, std::size_t frame);
fs::path gt_mask(const fs::path& seq, std::string_view label, std::size_t frame);
fs::path depth(const fs::path& seq, std::size_t frame);
fs::path rgb(const fs::path& seq, std::size_t frame);
fs::path truth_trajectory(const fs::path& seq, std::string_view label);
// A prediction directory mirrors masks/: <dir>/<label>/<frame:06d>.png
fs::path prediction(const fs::path& dir, std::string_view label, std::size_t frame);
} // namespace layout

// 8-bit grayscale; value > 127 is object.
BitMask load_mask(const fs::path& path, int width, int height);
void write_mask(const fs::path& path, const BitMask& mask);

// 16-bit grayscale; stored u maps to u * scale meters, u = 0 is missing.
DepthMap load_depth(const fs::path& path, double scale, int width, int height);
std::vector<std::uint16_t> load_depth_raw(const fs::path& path, int width, int height);
void write_depth_raw(const fs::path& path, int width, int height, const std::vector<std::uint16_t>& raw);

enum class Severity { warning, error };

struct Issue {
    std::size_t frame = 0;
    Severity severity = Severity::error;
    std::string message;
};

struct ValidateOptions {
    double max_depth = kDefaultMaxDepth;
};

// Empty result means every referenced file exists, decodes, has the frame
// dimensions, and every depth is below max_depth.
std::vector<Issue> validate_sequence(const SequenceManifest& manifest, const ValidateOptions& options = {});

// Checks that <dir>/<label>/<frame>.png exists and decodes for every frame and
// label of the manifest.
std::vector<Issue> validate_mask_directory(const SequenceManifest& manifest, const fs::path& dir);

bool has_errors(const std::vector<Issue>& issues);
std::string format_issue(const Issue& issue);

} // namespace upk
