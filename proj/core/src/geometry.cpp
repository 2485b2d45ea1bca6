#include "upk/geometry.hpp"

#include "upk/atomic_file.hpp"
#include "upk/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace upk {

const char* to_string(TrackStatus status)
{
    switch (status) {
    case TrackStatus::tracked: return "tracked";
    case TrackStatus::held: return "held";
    case TrackStatus::lost: return "lost";
    }
    return "unknown";
}

std::optional<TrackStatus> parse_track_status(const std::string& text)
{
    if (text == "tracked")
        return TrackStatus::tracked;
    if (text == "held")
        return TrackStatus::held;
    if (text == "lost")
        return TrackStatus::lost;
    return std::nullopt;
}

Pose Pose::inverse() const
{
    Pose inv = *this;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

Pose compose(const Pose& lhs, const Pose& rhs)
{
    Pose out = lhs;
    out.rotation = lhs.rotation * rhs.rotation;
    out.translation = lhs.rotation * rhs.translation + lhs.translation;
    return out;
}

Rotation axis_angle(const Eigen::Vector3d& axis, double radians)
{
    return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

bool is_rotation(const Rotation& r, double tolerance)
{
    if (!r.allFinite())
        return false;
    const double ortho = (r.transpose() * r - Rotation::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tolerance && std::abs(r.determinant() - 1.0) <= tolerance;
}

Point3 backproject(double u, double v, double z, const CameraIntrinsics& k)
{
    if (!(z > 0.0) || !std::isfinite(z))
        throw NonPositiveDepth("backproject: depth must be positive and finite");
    return {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
}

PixelDepth project(const Point3& p, const CameraIntrinsics& k)
{
    if (!(p.z() > 0.0))
        throw NonPositiveDepth("project: point is not in front of the camera");
    return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, p.z()};
}

PointCloud mask_to_cloud(const BitMask& mask, const DepthMap& depth, const CameraIntrinsics& k, std::size_t stride,
                         std::size_t frame)
{
    if (mask.width() != depth.width() || mask.height() != depth.height() || mask.width() != k.width
        || mask.height() != k.height)
        throw DimensionMismatch("mask, depth and intrinsics dimensions disagree");
    if (stride == 0)
        throw BadThreshold("stride must be at least 1");

    PointCloud cloud;
    cloud.source_frame = frame;
    std::size_t n = 0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y) || !depth.valid(x, y))
                continue;
            if (n++ % stride == 0)
                cloud.points.push_back(backproject(x, y, depth.at(x, y), k));
        }
    return cloud;
}

namespace {

Eigen::Vector3d centroid(const std::vector<Point3>& pts)
{
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : pts)
        c += p;
    return c / static_cast<double>(pts.size());
}

} // namespace

Pose kabsch(const PointCloud& src, const PointCloud& dst)
{
    if (src.size() != dst.size())
        throw TooFewPoints("kabsch: point counts differ (" + std::to_string(src.size()) + " vs "
                           + std::to_string(dst.size()) + ")");
    if (src.size() < 3)
        throw TooFewPoints("kabsch: need at least 3 correspondences");

    const Eigen::Vector3d cs = centroid(src.points);
    const Eigen::Vector3d cd = centroid(dst.points);
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i)
        h += (src.points[i] - cs) * (dst.points[i] - cd).transpose();

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d s = svd.singularValues();
    if (!(s(0) > 0.0) || s(1) <= 1e-12 * s(0))
        throw DegenerateGeometry("kabsch: cross-covariance has rank < 2 (collinear or coincident points)");

    const Eigen::Matrix3d& u = svd.matrixU();
    const Eigen::Matrix3d& v = svd.matrixV();
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

    Pose pose;
    pose.rotation = v * d * u.transpose();
    pose.translation = cd - pose.rotation * cs;

    double sq = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i)
        sq += (pose.apply(src.points[i]) - dst.points[i]).squaredNorm();
    pose.status = TrackStatus::tracked;
    pose.confidence = 1.0 / (1.0 + std::sqrt(sq / static_cast<double>(src.size())));
    return pose;
}

Pose pca_pose(const PointCloud& cloud, const std::optional<Pose>& prev, EigenTieBreak tie_break)
{
    if (cloud.size() < 3)
        throw TooFewPoints("pca_pose: need at least 3 points");

    const Eigen::Vector3d c = centroid(cloud.points);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : cloud.points) {
        const Eigen::Vector3d d = p - c;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(cloud.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    if (eig.info() != Eigen::Success)
        throw DegenerateGeometry("pca_pose: eigen decomposition failed");
    // Ascending order from Eigen; index 2 is the largest.
    const Eigen::Vector3d lambda = eig.eigenvalues();
    const Eigen::Matrix3d vecs = eig.eigenvectors();
    if (!(lambda(2) > 0.0))
        throw DegenerateGeometry("pca_pose: all points coincide");
    const double gap = (lambda(2) - lambda(1)) / lambda(2);
    if (gap < kEigenTieTolerance && tie_break == EigenTieBreak::strict)
        throw DegenerateGeometry("pca_pose: two largest eigenvalues tie; principal axis undefined");

    Eigen::Vector3d a0 = vecs.col(2);
    Eigen::Vector3d a1 = vecs.col(1);

    auto orient = [](Eigen::Vector3d& axis, const Eigen::Vector3d& ref) {
        const double d = axis.dot(ref);
        if (std::abs(d) > 1e-12) {
            if (d < 0.0)
                axis = -axis;
            return;
        }
        // Perpendicular to the reference: fall back to the first significant component.
        for (int i = 0; i < 3; ++i)
            if (std::abs(axis(i)) > 1e-12) {
                if (axis(i) < 0.0)
                    axis = -axis;
                return;
            }
    };
    if (prev) {
        orient(a0, prev->rotation.col(0));
        orient(a1, prev->rotation.col(1));
    } else {
        orient(a0, Eigen::Vector3d::UnitX());
        orient(a1, Eigen::Vector3d::UnitY());
    }
    a1 = (a1 - a1.dot(a0) * a0).normalized();

    Pose pose;
    pose.rotation.col(0) = a0;
    pose.rotation.col(1) = a1;
    pose.rotation.col(2) = a0.cross(a1);
    pose.translation = c;
    pose.status = TrackStatus::tracked;
    pose.confidence = gap;
    return pose;
}

double rotation_geodesic(const Rotation& r1, const Rotation& r2)
{
    if (!is_rotation(r1) || !is_rotation(r2))
        throw NotARotation("rotation_geodesic: input is not a proper rotation");
    const Eigen::Matrix3d m = r1.transpose() * r2;
    // atan2 keeps full precision near 0 and π, where arccos of the trace
    // loses about half the significant digits.
    const double cos_theta = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
    const Eigen::Vector3d skew(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    const double sin_theta = std::min(skew.norm() / 2.0, 1.0);
    return std::atan2(sin_theta, cos_theta);
}

Eigen::Vector3d euler_zyx(const Rotation& r)
{
    const double yaw = std::atan2(r(1, 0), r(0, 0));
    const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    const double roll = std::atan2(r(2, 1), r(2, 2));
    return {yaw, pitch, roll};
}

std::string to_xyz(const PointCloud& cloud)
{
    std::string out;
    out.reserve(cloud.size() * 40);
    char buf[96];
    for (const auto& p : cloud.points) {
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        out += buf;
    }
    return out;
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) { write_file_atomic(path, to_xyz(cloud)); }

} // namespace upk
