#include "egoflow/geometry.hpp"

#include <cmath>
#include <string>

#include "egoflow/error.hpp"

namespace egoflow {

void CameraIntrinsics::validate() const {
    if (!(std::isfinite(f) && f > 0.0)) throw_invalid("focal length must be positive");
    if (width <= 0 || height <= 0) throw_invalid("image dimensions must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw_invalid("principal point must lie inside the image");
}

void StereoRig::validate() const {
    intrinsics.validate();
    if (!(std::isfinite(baseline) && baseline > 0.0))
        throw_invalid("stereo baseline must be positive");
}

Eigen::Matrix<double, 6, 1> Twist::stacked() const {
    Eigen::Matrix<double, 6, 1> x;
    x << v, omega;
    return x;
}

Twist Twist::from_stacked(const Eigen::Matrix<double, 6, 1>& x) {
    return Twist{x.head<3>(), x.tail<3>()};
}

bool Twist::is_finite() const { return v.allFinite() && omega.allFinite(); }

SE3Pose SE3Pose::inverse() const {
    SE3Pose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

SE3Pose SE3Pose::operator*(const SE3Pose& rhs) const {
    return SE3Pose{rotation * rhs.rotation, rotation * rhs.translation + translation};
}

Eigen::Vector3d SE3Pose::operator*(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
}

NormalizedPoint normalize_pixel(const CameraIntrinsics& intr, double u, double v) {
    return {(u - intr.cx) / intr.f, (v - intr.cy) / intr.f};
}

Eigen::Vector2d denormalize_point(const CameraIntrinsics& intr, NormalizedPoint p) {
    return {p.x * intr.f + intr.cx, p.y * intr.f + intr.cy};
}

MotionMatrices motion_matrices(NormalizedPoint p) {
    const double x = p.x;
    const double y = p.y;
    MotionMatrices m;
    m.a << -1.0, 0.0, x,
           0.0, -1.0, y;
    m.b << x * y, -(1.0 + x * x), y,
           1.0 + y * y, -x * y, -x;
    return m;
}

double disparity_to_depth(const StereoRig& rig, double disparity) {
    if (!(std::isfinite(disparity) && disparity > 0.0))
        throw_invalid("disparity must be positive, got " + std::to_string(disparity));
    return rig.focal_baseline() / disparity;
}

double depth_to_disparity(const StereoRig& rig, double depth) {
    if (!(std::isfinite(depth) && depth > 0.0))
        throw_invalid("depth must be positive, got " + std::to_string(depth));
    return rig.focal_baseline() / depth;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
    Eigen::Matrix3d k;
    k << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
         -w.y(), w.x(), 0.0;
    return k;
}

SE3Pose twist_exp(const Twist& t) {
    const double theta = t.omega.norm();
    const double theta2 = theta * theta;
    double a, b, c;
    if (theta < kSmallAngle) {
        a = 1.0 - theta2 / 6.0;
        b = 0.5 - theta2 / 24.0;
        c = 1.0 / 6.0 - theta2 / 120.0;
    } else {
        const double s = std::sin(theta);
        const double half = std::sin(0.5 * theta) / (0.5 * theta);
        a = s / theta;
        b = 0.5 * half * half;
        // theta - sin(theta) cancels badly below ~1e-2
        c = theta < 1e-2 ? 1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0
                         : (theta - s) / (theta2 * theta);
    }
    const Eigen::Matrix3d k = skew(t.omega);
    const Eigen::Matrix3d k2 = k * k;
    const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
    SE3Pose pose;
    pose.rotation = id + a * k + b * k2;
    pose.translation = (id + b * k + c * k2) * t.v;
    return pose;
}

double rotation_angle(const Eigen::Matrix3d& r) {
    const double cos_part = 0.5 * (r.trace() - 1.0);
    const Eigen::Vector3d axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    return std::atan2(0.5 * axis.norm(), cos_part);
}

}  // namespace egoflow
