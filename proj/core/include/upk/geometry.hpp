#pragma once

#include "upk/raster.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace upk {

// Camera coordinates in meters: x right, y down, z forward.
using Point3 = Eigen::Vector3d;
using Rotation = Eigen::Matrix3d;

struct PointCloud {
    std::vector<Point3> points;
    std::size_t source_frame = 0;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

enum class TrackStatus { tracked, held, lost };

const char* to_string(TrackStatus status);
std::optional<TrackStatus> parse_track_status(const std::string& text);

// Rigid transform mapping object coordinates into camera coordinates.
struct Pose {
    Rotation rotation = Rotation::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    TrackStatus status = TrackStatus::tracked;
    double confidence = 1.0;

    Point3 apply(const Point3& p) const { return rotation * p + translation; }
    Pose inverse() const;
};

// lhs ∘ rhs; status and confidence come from lhs.
Pose compose(const Pose& lhs, const Pose& rhs);

Rotation axis_angle(const Eigen::Vector3d& axis, double radians);

bool is_rotation(const Rotation& r, double tolerance = 1e-9);

Point3 backproject(double u, double v, double z, const CameraIntrinsics& k);

struct PixelDepth {
    double u = 0.0;
    double v = 0.0;
    double z = 0.0;
};

PixelDepth project(const Point3& p, const CameraIntrinsics& k);

// Every stride-th masked pixel with valid depth, row-major.
PointCloud mask_to_cloud(const BitMask& mask, const DepthMap& depth, const CameraIntrinsics& k,
                         std::size_t stride = 1, std::size_t frame = 0);

// Least-squares rigid transform taking src[i] onto dst[i]. confidence is
// 1 / (1 + RMSE). Throws TooFewPoints or DegenerateGeometry.
Pose kabsch(const PointCloud& src, const PointCloud& dst);

enum class EigenTieBreak { strict, permissive };

inline constexpr double kEigenTieTolerance = 1e-9;

// Centroid plus principal axes (largest variance first). Axis signs follow
// `prev` when given, otherwise the camera axes. The third axis is the cross
// product of the first two, so the result is always a proper rotation.
// confidence is the relative gap between the two largest eigenvalues.
Pose pca_pose(const PointCloud& cloud, const std::optional<Pose>& prev = std::nullopt,
              EigenTieBreak tie_break = EigenTieBreak::strict);

// Angle of r1ᵀ·r2 in [0, π]. Throws NotARotation.
double rotation_geodesic(const Rotation& r1, const Rotation& r2);

// (yaw about z, pitch about y, roll about x), for display only.
Eigen::Vector3d euler_zyx(const Rotation& r);

// "x y z" per line, 9 significant digits.
std::string to_xyz(const PointCloud& cloud);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

} // namespace upk
