#include "upk/pose_tracker.hpp"

#include "upk/error.hpp"
#include "upk/parallel.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace upk {

const char* to_string(GapPolicy policy) { return policy == GapPolicy::hold ? "hold" : "lost"; }

void TrackerConfig::validate() const
{
    if (min_points < 3)
        throw BadThreshold("min_points must be at least 3");
    if (stride < 1)
        throw BadThreshold("stride must be at least 1");
    if (!(flip_threshold > 0.0 && flip_threshold <= std::numbers::pi))
        throw BadThreshold("flip_threshold must lie in (0, pi]");
}

const TrajectoryEntry* PoseTrajectory::find(std::size_t frame) const
{
    for (const auto& e : entries)
        if (e.frame == frame)
            return &e;
    return nullptr;
}

Pose handle_gap(const Pose& prev, std::size_t frames_held, const TrackerConfig& cfg)
{
    Pose out = prev;
    out.confidence = 0.0;
    if (cfg.gap_policy == GapPolicy::hold && frames_held <= cfg.max_hold_frames)
        out.status = TrackStatus::held;
    else
        out.status = TrackStatus::lost;
    return out;
}

PoseTracker::PoseTracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::optional<Pose> PoseTracker::estimate(const PointCloud& cloud) const
{
    if (cloud.size() < cfg_.min_points)
        return std::nullopt;
    try {
        return pca_pose(cloud, last_tracked_, cfg_.tie_break);
    } catch (const DegenerateGeometry&) {
        return std::nullopt;
    }
}

Pose PoseTracker::update(const PointCloud& cloud)
{
    const std::size_t frame = frames_seen_++;
    if (!last_) {
        if (cloud.size() < cfg_.min_points)
            throw InitializationError("frame " + std::to_string(frame) + ": the object must be segmented in the first "
                                      "frame; got " + std::to_string(cloud.size()) + " valid points, need "
                                      + std::to_string(cfg_.min_points));
        auto first = estimate(cloud);
        if (!first)
            throw InitializationError("frame " + std::to_string(frame)
                                      + ": first-frame cloud has no well-defined principal axis");
        last_tracked_ = last_ = *first;
        return *first;
    }

    if (last_->status == TrackStatus::lost)
        return *last_;

    if (auto pose = estimate(cloud)) {
        gap_ = 0;
        last_tracked_ = last_ = *pose;
        return *pose;
    }

    last_ = handle_gap(*last_, ++gap_, cfg_);
    return *last_;
}

PoseTrajectory track_clouds(const std::vector<PointCloud>& clouds, const std::string& sequence_id,
                            const std::string& label, const TrackerConfig& cfg)
{
    PoseTracker tracker(cfg);
    PoseTrajectory traj{sequence_id, label, {}};
    traj.entries.reserve(clouds.size());
    for (std::size_t i = 0; i < clouds.size(); ++i)
        traj.entries.push_back({i, tracker.update(clouds[i])});
    return traj;
}

namespace {

template <typename E>
[[noreturn]] void rethrow_with_frame(std::size_t frame, const E& e)
{
    throw E("frame " + std::to_string(frame) + ": " + e.what());
}

PointCloud load_cloud(const SequenceManifest& m, std::size_t frame, const std::string& label, const TrackerConfig& cfg,
                      MaskSource source)
{
    const auto& f = m.frames.at(frame);
    try {
        fs::path mask_path;
        if (source == MaskSource::predicted) {
            mask_path = f.masks.at(label);
        } else {
            auto it = f.gt.find(label);
            if (it == f.gt.end())
                throw SchemaError("no ground-truth mask for label '" + label + "'");
            mask_path = it->second;
        }
        const auto mask = load_mask(mask_path, m.intrinsics.width, m.intrinsics.height);
        const auto depth = load_depth(f.depth, m.depth_scale, m.intrinsics.width, m.intrinsics.height);
        return mask_to_cloud(mask, depth, m.intrinsics, cfg.stride, frame);
    } catch (const DecodeError& e) {
        rethrow_with_frame(frame, e);
    } catch (const DimensionMismatch& e) {
        rethrow_with_frame(frame, e);
    } catch (const SchemaError& e) {
        rethrow_with_frame(frame, e);
    }
}

} // namespace

PoseTrajectory track_sequence(const SequenceManifest& manifest, const std::string& label, const TrackerConfig& cfg,
                              MaskSource source)
{
    cfg.validate();
    if (!manifest.has_label(label))
        throw SchemaError("label '" + label + "' is not declared in manifest " + manifest.sequence_id);

    // Loading is independent per frame; tracking itself is sequential.
    std::vector<PointCloud> clouds(manifest.frame_count);
    parallel_for(clouds.size(), [&](std::size_t i) { clouds[i] = load_cloud(manifest, i, label, cfg, source); });
    return track_clouds(clouds, manifest.sequence_id, label, cfg);
}

std::vector<std::size_t> detect_flips(const PoseTrajectory& trajectory, double threshold)
{
    std::vector<std::size_t> flips;
    const auto& e = trajectory.entries;
    for (std::size_t k = 1; k < e.size(); ++k) {
        if (e[k - 1].pose.status != TrackStatus::tracked || e[k].pose.status != TrackStatus::tracked)
            continue;
        if (rotation_geodesic(e[k - 1].pose.rotation, e[k].pose.rotation) > threshold)
            flips.push_back(e[k].frame);
    }
    return flips;
}

TrajectoryErrorStats compare_trajectories(const PoseTrajectory& a, const PoseTrajectory& b)
{
    std::set<std::size_t> fa, fb;
    for (const auto& e : a.entries)
        fa.insert(e.frame);
    for (const auto& e : b.entries)
        fb.insert(e.frame);
    if (fa != fb) {
        std::ostringstream msg;
        msg << "trajectories cover different frames (" << fa.size() << " vs " << fb.size() << " entries)";
        throw FrameSetMismatch(msg.str());
    }

    TrajectoryErrorStats stats;
    double sq = 0.0, rot_sum = 0.0;
    for (const auto& ea : a.entries) {
        const auto* eb = b.find(ea.frame);
        if (ea.pose.status != TrackStatus::tracked || eb->pose.status != TrackStatus::tracked)
            continue;
        sq += (ea.pose.translation - eb->pose.translation).squaredNorm();
        const double r = rotation_geodesic(ea.pose.rotation, eb->pose.rotation);
        rot_sum += r;
        stats.rotation_max = std::max(stats.rotation_max, r);
        ++stats.frames_compared;
    }
    if (stats.frames_compared == 0)
        throw NoComparableFrames("no frame is tracked in both trajectories");
    const double n = static_cast<double>(stats.frames_compared);
    stats.translation_rmse = std::sqrt(sq / n);
    stats.rotation_mean = rot_sum / n;
    return stats;
}

StatusHistogram histogram(const PoseTrajectory& trajectory)
{
    StatusHistogram h;
    for (const auto& e : trajectory.entries) {
        switch (e.pose.status) {
        case TrackStatus::tracked: ++h.tracked; break;
        case TrackStatus::held: ++h.held; break;
        case TrackStatus::lost: ++h.lost; break;
        }
    }
    return h;
}

} // namespace upk
