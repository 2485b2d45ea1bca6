#include "upk/sequence_io.hpp"

#include "upk/atomic_file.hpp"
#include "upk/error.hpp"
#include "upk/parallel.hpp"
#include "upk/png_codec.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>

namespace upk {

using nlohmann::json;

bool SequenceManifest::has_label(std::string_view label) const
{
    return std::find(object_labels.begin(), object_labels.end(), label) != object_labels.end();
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw SchemaError(where + ": unknown field '" + key + "'");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError(where + ": missing required field '" + key + "'");
    return *it;
}

double require_number(const json& obj, const std::string& key, const std::string& where)
{
    const auto& v = require(obj, key, where);
    if (!v.is_number())
        throw SchemaError(where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::size_t require_count(const json& obj, const std::string& key, const std::string& where)
{
    const auto& v = require(obj, key, where);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw SchemaError(where + ": field '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& where)
{
    const auto& v = require(obj, key, where);
    if (!v.is_string())
        throw SchemaError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

int require_int(const json& obj, const std::string& key, const std::string& where)
{
    const auto& v = require(obj, key, where);
    if (!v.is_number_integer())
        throw SchemaError(where + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

std::map<std::string, fs::path> parse_label_paths(const json& obj, const std::string& key, const std::string& where,
                                                  const fs::path& root)
{
    if (!obj.is_object())
        throw SchemaError(where + ": field '" + key + "' must be an object of label -> path");
    std::map<std::string, fs::path> out;
    for (const auto& [label, path] : obj.items()) {
        if (!path.is_string())
            throw SchemaError(where + ": field '" + key + "." + label + "' must be a string");
        out[label] = root / path.get<std::string>();
    }
    return out;
}

std::string relative_string(const fs::path& p, const fs::path& dir)
{
    const auto abs_p = fs::absolute(p).lexically_normal();
    const auto abs_dir = fs::absolute(dir).lexically_normal();
    auto rel = abs_p.lexically_relative(abs_dir);
    if (rel.empty())
        return abs_p.generic_string();
    return rel.generic_string();
}

std::string normalized_key(const fs::path& p) { return fs::absolute(p).lexically_normal().generic_string(); }

} // namespace

SequenceManifest parse_manifest(std::string_view text, const fs::path& root)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    if (!doc.is_object())
        throw SchemaError("manifest: top-level value must be an object");

    const std::string where = "manifest";
    reject_unknown(doc, {"sequence_id", "frame_count", "object_labels", "intrinsics", "depth_scale", "frames", "metadata"},
                   where);

    SequenceManifest m;
    m.root = root;
    m.sequence_id = require_string(doc, "sequence_id", where);
    m.frame_count = require_count(doc, "frame_count", where);

    const auto& labels = require(doc, "object_labels", where);
    if (!labels.is_array())
        throw SchemaError("manifest: field 'object_labels' must be an array of strings");
    for (const auto& l : labels) {
        if (!l.is_string())
            throw SchemaError("manifest: field 'object_labels' must be an array of strings");
        const auto label = l.get<std::string>();
        if (m.has_label(label))
            throw ConsistencyError("manifest: duplicate object label '" + label + "'");
        m.object_labels.push_back(label);
    }

    const auto& k = require(doc, "intrinsics", where);
    if (!k.is_object())
        throw SchemaError("manifest: field 'intrinsics' must be an object");
    reject_unknown(k, {"fx", "fy", "cx", "cy", "width", "height"}, "manifest.intrinsics");
    m.intrinsics.fx = require_number(k, "fx", "manifest.intrinsics");
    m.intrinsics.fy = require_number(k, "fy", "manifest.intrinsics");
    m.intrinsics.cx = require_number(k, "cx", "manifest.intrinsics");
    m.intrinsics.cy = require_number(k, "cy", "manifest.intrinsics");
    m.intrinsics.width = require_int(k, "width", "manifest.intrinsics");
    m.intrinsics.height = require_int(k, "height", "manifest.intrinsics");
    m.intrinsics.validate();

    m.depth_scale = require_number(doc, "depth_scale", where);
    if (!(m.depth_scale > 0.0) || !std::isfinite(m.depth_scale))
        throw SchemaError("manifest: field 'depth_scale' must be positive and finite");

    if (auto it = doc.find("metadata"); it != doc.end()) {
        if (!it->is_object())
            throw SchemaError("manifest: field 'metadata' must be an object");
        m.metadata_json = it->dump();
    }

    const auto& frames = require(doc, "frames", where);
    if (!frames.is_array())
        throw SchemaError("manifest: field 'frames' must be an array");

    std::vector<std::optional<FrameEntry>> slots(m.frame_count);
    for (const auto& f : frames) {
        if (!f.is_object())
            throw SchemaError("manifest.frames: each entry must be an object");
        const std::size_t index = require_count(f, "index", "manifest.frames[]");
        const std::string fw = "manifest.frames[" + std::to_string(index) + "]";
        reject_unknown(f, {"index", "rgb", "depth", "masks", "gt", "timestamp", "source_index"}, fw);

        FrameEntry e;
        e.index = index;
        e.depth = root / require_string(f, "depth", fw);
        e.masks = parse_label_paths(require(f, "masks", fw), "masks", fw, root);
        if (auto it = f.find("gt"); it != f.end())
            e.gt = parse_label_paths(*it, "gt", fw, root);
        if (auto it = f.find("rgb"); it != f.end()) {
            if (!it->is_string())
                throw SchemaError(fw + ": field 'rgb' must be a string");
            e.rgb = root / it->get<std::string>();
        }
        if (auto it = f.find("timestamp"); it != f.end()) {
            if (!it->is_number())
                throw SchemaError(fw + ": field 'timestamp' must be a number");
            e.timestamp = it->get<double>();
        }
        if (f.contains("source_index"))
            e.source_index = require_count(f, "source_index", fw);

        for (const auto& label : m.object_labels)
            if (!e.masks.count(label))
                throw SchemaError(fw + ": missing required field 'masks." + label + "'");
        for (const auto& [label, path] : e.masks)
            if (!m.has_label(label))
                throw ConsistencyError(fw + ": mask for undeclared label '" + label + "'");
        for (const auto& [label, path] : e.gt)
            if (!m.has_label(label))
                throw ConsistencyError(fw + ": ground truth for undeclared label '" + label + "'");

        if (index >= m.frame_count)
            throw ConsistencyError(fw + ": index out of range for frame_count " + std::to_string(m.frame_count));
        if (slots[index])
            throw ConsistencyError("manifest: duplicate frame index " + std::to_string(index));
        slots[index] = std::move(e);
    }

    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i])
            throw ConsistencyError("manifest: missing frame index " + std::to_string(i));
        m.frames.push_back(std::move(*slots[i]));
    }

    std::set<std::string> seen;
    auto claim = [&](const fs::path& p, std::size_t frame) {
        if (!seen.insert(normalized_key(p)).second)
            throw ConsistencyError("manifest: frame " + std::to_string(frame) + " reuses file " + p.generic_string());
    };
    for (const auto& f : m.frames) {
        claim(f.depth, f.index);
        if (f.rgb)
            claim(*f.rgb, f.index);
        for (const auto& [l, p] : f.masks)
            claim(p, f.index);
        for (const auto& [l, p] : f.gt)
            claim(p, f.index);
    }
    return m;
}

SequenceManifest load_manifest(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("manifest: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path());
}

std::string serialize_manifest(const SequenceManifest& m, const fs::path& document_dir)
{
    json doc = json::object();
    doc["sequence_id"] = m.sequence_id;
    doc["frame_count"] = m.frame_count;
    doc["object_labels"] = m.object_labels;
    doc["intrinsics"] = {{"fx", m.intrinsics.fx},        {"fy", m.intrinsics.fy},
                         {"cx", m.intrinsics.cx},        {"cy", m.intrinsics.cy},
                         {"width", m.intrinsics.width}, {"height", m.intrinsics.height}};
    doc["depth_scale"] = m.depth_scale;
    if (!m.metadata_json.empty())
        doc["metadata"] = json::parse(m.metadata_json);

    json frames = json::array();
    for (const auto& f : m.frames) {
        json e = json::object();
        e["index"] = f.index;
        if (f.rgb)
            e["rgb"] = relative_string(*f.rgb, document_dir);
        e["depth"] = relative_string(f.depth, document_dir);
        json masks = json::object();
        for (const auto& [label, p] : f.masks)
            masks[label] = relative_string(p, document_dir);
        e["masks"] = masks;
        if (!f.gt.empty()) {
            json gt = json::object();
            for (const auto& [label, p] : f.gt)
                gt[label] = relative_string(p, document_dir);
            e["gt"] = gt;
        }
        if (f.timestamp)
            e["timestamp"] = *f.timestamp;
        if (f.source_index)
            e["source_index"] = *f.source_index;
        frames.push_back(std::move(e));
    }
    doc["frames"] = std::move(frames);
    return doc.dump(2) + "\n";
}

void save_manifest(const SequenceManifest& manifest, const fs::path& path)
{
    const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    write_file_atomic(path, serialize_manifest(manifest, dir));
}

namespace layout {

std::string frame_file(std::size_t frame)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06zu.png", frame);
    return buf;
}

fs::path manifest(const fs::path& seq) { return seq / "manifest.json"; }
fs::path mask(const fs::path& seq, std::string_view label, std::size_t frame)
{
    return seq / "masks" / std::string(label) / frame_file(frame);
}
fs::path gt_mask(const fs::path& seq, std::string_view label, std::size_t frame)
{
    return seq / "gt" / std::string(label) / frame_file(frame);
}
fs::path depth(const fs::path& seq, std::size_t frame) { return seq / "depth" / frame_file(frame); }
fs::path rgb(const fs::path& seq, std::size_t frame) { return seq / "rgb" / frame_file(frame); }
fs::path truth_trajectory(const fs::path& seq, std::string_view label)
{
    return seq / "truth" / (std::string(label) + ".jsonl");
}
fs::path prediction(const fs::path& dir, std::string_view label, std::size_t frame)
{
    return dir / std::string(label) / frame_file(frame);
}

} // namespace layout

namespace {

void check_dims(const png::Image& img, int width, int height, const fs::path& path)
{
    if (img.width != width || img.height != height)
        throw DimensionMismatch(path.string() + ": image is " + std::to_string(img.width) + "x"
                                + std::to_string(img.height) + ", expected " + std::to_string(width) + "x"
                                + std::to_string(height));
}

} // namespace

BitMask load_mask(const fs::path& path, int width, int height)
{
    const auto img = png::read(path);
    if (img.color != png::ColorType::gray || img.bit_depth != 8)
        throw DecodeError(path.string() + ": mask must be 8-bit single-channel");
    check_dims(img, width, height, path);
    std::vector<std::uint8_t> bits(img.samples.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        bits[i] = img.samples[i] > 127 ? 1 : 0;
    return BitMask(width, height, std::move(bits));
}

void write_mask(const fs::path& path, const BitMask& mask)
{
    std::vector<std::uint8_t> px(mask.size());
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = mask[i] ? 255 : 0;
    write_file_atomic(path, png::encode_gray8(mask.width(), mask.height(), px));
}

std::vector<std::uint16_t> load_depth_raw(const fs::path& path, int width, int height)
{
    auto img = png::read(path);
    if (img.color != png::ColorType::gray || img.bit_depth != 16)
        throw DecodeError(path.string() + ": depth must be 16-bit single-channel");
    check_dims(img, width, height, path);
    return std::move(img.samples);
}

DepthMap load_depth(const fs::path& path, double scale, int width, int height)
{
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ScaleError("depth scale must be positive, got " + std::to_string(scale));
    const auto raw = load_depth_raw(path, width, height);
    std::vector<double> z(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        z[i] = static_cast<double>(raw[i]) * scale;
    return DepthMap(width, height, std::move(z));
}

void write_depth_raw(const fs::path& path, int width, int height, const std::vector<std::uint16_t>& raw)
{
    write_file_atomic(path, png::encode_gray16(width, height, raw));
}

namespace {

void check_file(std::vector<Issue>& out, std::size_t frame, const fs::path& path, const std::string& what,
                const std::function<void()>& decode)
{
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        out.push_back({frame, Severity::error, "missing " + what + " file " + path.generic_string()});
        return;
    }
    try {
        decode();
    } catch (const Error& e) {
        out.push_back({frame, Severity::error, what + ": " + e.what()});
    }
}

std::vector<Issue> flatten(std::vector<std::vector<Issue>> per_frame)
{
    std::vector<Issue> out;
    for (auto& v : per_frame)
        for (auto& i : v)
            out.push_back(std::move(i));
    return out;
}

} // namespace

std::vector<Issue> validate_sequence(const SequenceManifest& m, const ValidateOptions& options)
{
    const int w = m.intrinsics.width;
    const int h = m.intrinsics.height;
    std::vector<std::vector<Issue>> per_frame(m.frames.size());

    parallel_for(m.frames.size(), [&](std::size_t i) {
        const auto& f = m.frames[i];
        auto& out = per_frame[i];
        check_file(out, f.index, f.depth, "depth", [&] {
            const auto raw = load_depth_raw(f.depth, w, h);
            std::size_t beyond = 0;
            double worst = 0.0;
            for (auto u : raw) {
                const double z = u * m.depth_scale;
                if (u != 0 && z >= options.max_depth) {
                    ++beyond;
                    worst = std::max(worst, z);
                }
            }
            if (beyond > 0) {
                std::ostringstream msg;
                msg << beyond << " depth value(s) at or beyond max_depth " << options.max_depth << " m (max " << worst
                    << " m)";
                out.push_back({f.index, Severity::warning, msg.str()});
            }
        });
        for (const auto& [label, path] : f.masks)
            check_file(out, f.index, path, "mask '" + label + "'", [&] { load_mask(path, w, h); });
        for (const auto& [label, path] : f.gt)
            check_file(out, f.index, path, "ground truth '" + label + "'", [&] { load_mask(path, w, h); });
        if (f.rgb) {
            check_file(out, f.index, *f.rgb, "rgb", [&] {
                const auto img = png::read(*f.rgb);
                if (img.color != png::ColorType::rgb || img.bit_depth != 8)
                    throw DecodeError("rgb must be 8-bit 3-channel");
                check_dims(img, w, h, *f.rgb);
            });
        }
    });
    return flatten(std::move(per_frame));
}

std::vector<Issue> validate_mask_directory(const SequenceManifest& m, const fs::path& dir)
{
    std::vector<std::vector<Issue>> per_frame(m.frames.size());
    parallel_for(m.frames.size(), [&](std::size_t i) {
        for (const auto& label : m.object_labels) {
            const auto path = layout::prediction(dir, label, i);
            check_file(per_frame[i], i, path, "mask '" + label + "'",
                       [&] { load_mask(path, m.intrinsics.width, m.intrinsics.height); });
        }
    });
    return flatten(std::move(per_frame));
}

bool has_errors(const std::vector<Issue>& issues)
{
    return std::any_of(issues.begin(), issues.end(), [](const Issue& i) { return i.severity == Severity::error; });
}

std::string format_issue(const Issue& issue)
{
    return std::to_string(issue.frame) + ": " + (issue.severity == Severity::error ? "error: " : "warning: ")
        + issue.message;
}

} // namespace upk
