#include "upk/frame_filter.hpp"

#include "upk/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace upk {

const std::set<std::string>& default_vocabulary()
{
    static const std::set<std::string> vocab{"face", "hand", "spoon", "food"};
    return vocab;
}

FilterRule default_eating_rule() { return {{"face", "food"}, {"hand", "spoon"}, 5}; }

bool passes(const FrameLabels& frame, const FilterRule& rule)
{
    for (const auto& l : rule.required_all)
        if (!frame.labels.count(l))
            return false;
    if (rule.required_any.empty())
        return true;
    for (const auto& l : rule.required_any)
        if (frame.labels.count(l))
            return true;
    return false;
}

std::vector<std::size_t> filter_frames(const std::vector<FrameLabels>& frames, const FilterRule& rule,
                                       const std::set<std::string>& vocabulary)
{
    for (const auto& set : {rule.required_all, rule.required_any})
        for (const auto& l : set)
            if (!vocabulary.count(l))
                throw UnknownLabel("rule references unknown label '" + l + "'");
    for (const auto& l : rule.required_all)
        if (rule.required_any.count(l))
            throw SchemaError("label '" + l + "' is in both required_all and required_any");
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (k > 0 && frames[k].frame <= frames[k - 1].frame)
            throw ConsistencyError("frame labels must be strictly increasing at frame "
                                   + std::to_string(frames[k].frame));
        for (const auto& l : frames[k].labels)
            if (!vocabulary.count(l))
                throw UnknownLabel("frame " + std::to_string(frames[k].frame) + " has unknown label '" + l + "'");
    }

    std::vector<bool> keep(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k)
        keep[k] = passes(frames[k], rule);

    // Fill short failing runs that have a passing frame on both sides.
    std::size_t k = 0;
    while (k < frames.size()) {
        if (keep[k]) {
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end < frames.size() && !keep[end])
            ++end;
        const bool flanked = k > 0 && end < frames.size();
        if (flanked && end - k <= rule.hysteresis)
            for (std::size_t j = k; j < end; ++j)
                keep[j] = true;
        k = end;
    }

    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < frames.size(); ++j)
        if (keep[j])
            out.push_back(frames[j].frame);
    return out;
}

std::vector<FrameLabels> parse_frame_labels(std::string_view jsonl)
{
    std::vector<FrameLabels> out;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("labels line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("frame") || !j.contains("labels"))
            throw SchemaError("labels line " + std::to_string(lineno) + ": expected {frame, labels}");
        for (const auto& [key, v] : j.items())
            if (key != "frame" && key != "labels")
                throw SchemaError("labels line " + std::to_string(lineno) + ": unknown field '" + key + "'");
        if (!j["frame"].is_number_unsigned() || !j["labels"].is_array())
            throw SchemaError("labels line " + std::to_string(lineno) + ": frame must be a non-negative integer and "
                              "labels an array");
        FrameLabels f;
        f.frame = j["frame"].get<std::size_t>();
        for (const auto& l : j["labels"]) {
            if (!l.is_string())
                throw SchemaError("labels line " + std::to_string(lineno) + ": labels must be strings");
            f.labels.insert(l.get<std::string>());
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<FrameLabels> load_frame_labels(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open labels file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_frame_labels(ss.str());
}

} // namespace upk
