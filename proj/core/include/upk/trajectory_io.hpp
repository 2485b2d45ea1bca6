#pragma once

#include "upk/pose_tracker.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace upk {

// One JSON object per frame:
// {"frame", "status", "confidence", "rotation": [9, row-major], "translation": [3]}
std::string trajectory_to_jsonl(const PoseTrajectory& trajectory);
PoseTrajectory parse_trajectory_jsonl(std::string_view text, const std::string& sequence_id = {},
                                      const std::string& label = {});
PoseTrajectory load_trajectory(const std::filesystem::path& path, const std::string& sequence_id = {},
                               const std::string& label = {});
void save_trajectory(const std::filesystem::path& path, const PoseTrajectory& trajectory);

// Flat table for plotting, with Z-Y-X Euler angles in degrees appended.
std::string trajectory_to_csv(const PoseTrajectory& trajectory);

} // namespace upk
