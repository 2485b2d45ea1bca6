#pragma once

#include "upk/geometry.hpp"
#include "upk/sequence_io.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace upk {

enum class GapPolicy { hold, lost };

const char* to_string(GapPolicy policy);

struct TrackerConfig {
    std::size_t min_points = 50;
    std::size_t stride = 2;
    GapPolicy gap_policy = GapPolicy::hold;
    std::size_t max_hold_frames = 30;
    double flip_threshold = 2.618; // ~150 degrees
    EigenTieBreak tie_break = EigenTieBreak::strict;

    // Throws BadThreshold.
    void validate() const;
};

struct TrajectoryEntry {
    std::size_t frame = 0;
    Pose pose;
};

struct PoseTrajectory {
    std::string sequence_id;
    std::string label;
    std::vector<TrajectoryEntry> entries;

    const TrajectoryEntry* find(std::size_t frame) const;
};

// Pose reported for a frame without a usable cloud. `frames_held` counts the
// current gap including this frame (1 for the first missing frame).
Pose handle_gap(const Pose& prev, std::size_t frames_held, const TrackerConfig& cfg);

// Frame-by-frame state machine: tracked while clouds are usable, held for
// short gaps, lost afterwards. There is no re-acquisition once lost.
class PoseTracker {
public:
    explicit PoseTracker(TrackerConfig cfg);

    // Throws InitializationError if the first cloud is unusable.
    Pose update(const PointCloud& cloud);

    std::size_t frames_seen() const { return frames_seen_; }
    const TrackerConfig& config() const { return cfg_; }

private:
    std::optional<Pose> estimate(const PointCloud& cloud) const;

    TrackerConfig cfg_;
    std::size_t frames_seen_ = 0;
    std::size_t gap_ = 0;
    std::optional<Pose> last_tracked_;
    std::optional<Pose> last_;
};

PoseTrajectory track_clouds(const std::vector<PointCloud>& clouds, const std::string& sequence_id,
                            const std::string& label, const TrackerConfig& cfg);

enum class MaskSource { predicted, ground_truth };

// Loads every frame's mask and depth, backprojects, and runs PoseTracker.
// Frame 0 must be segmented. I/O errors carry the frame index.
PoseTrajectory track_sequence(const SequenceManifest& manifest, const std::string& label, const TrackerConfig& cfg,
                              MaskSource source = MaskSource::predicted);

// Later frame of every adjacent tracked→tracked pair rotating by more than
// `threshold` radians.
std::vector<std::size_t> detect_flips(const PoseTrajectory& trajectory, double threshold);

struct TrajectoryErrorStats {
    double translation_rmse = 0.0;
    double rotation_mean = 0.0;
    double rotation_max = 0.0;
    std::size_t frames_compared = 0;
};

// Compares frames tracked in both. Throws FrameSetMismatch or
// NoComparableFrames.
TrajectoryErrorStats compare_trajectories(const PoseTrajectory& a, const PoseTrajectory& b);

struct StatusHistogram {
    std::size_t tracked = 0;
    std::size_t held = 0;
    std::size_t lost = 0;
};

StatusHistogram histogram(const PoseTrajectory& trajectory);

} // namespace upk
