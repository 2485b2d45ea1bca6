#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace upk {

struct FrameLabels {
    std::size_t frame = 0;
    std::set<std::string> labels;
};

// A frame passes when it carries every label in required_all and, if
// required_any is nonempty, at least one label from it. Runs of at most
// `hysteresis` failing frames between two passing frames are kept as well.
struct FilterRule {
    std::set<std::string> required_all;
    std::set<std::string> required_any;
    std::size_t hysteresis = 0;
};

const std::set<std::string>& default_vocabulary();
// Eating frames: face and food together with a hand or a spoon.
FilterRule default_eating_rule();

bool passes(const FrameLabels& frame, const FilterRule& rule);

// Returns kept frame indices in increasing order. Throws UnknownLabel when the
// rule or a frame uses a label outside `vocabulary`, ConsistencyError when the
// frames are not strictly increasing, and SchemaError when required_all and
// required_any overlap.
std::vector<std::size_t> filter_frames(const std::vector<FrameLabels>& frames, const FilterRule& rule,
                                       const std::set<std::string>& vocabulary = default_vocabulary());

// One JSON object per line: {"frame": 3, "labels": ["face", "spoon"]}.
std::vector<FrameLabels> parse_frame_labels(std::string_view jsonl);
std::vector<FrameLabels> load_frame_labels(const std::filesystem::path& path);

} // namespace upk
