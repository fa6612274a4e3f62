#pragma once

#include <Eigen/Core>

namespace egoflow {

/// Pinhole camera with square pixels.
struct CameraIntrinsics {
    double f = 1.0;   // focal length, pixels
    double cx = 0.0;  // principal point, pixels
    double cy = 0.0;
    int width = 1;
    int height = 1;

    /// Throws kInvalidInput unless f > 0, the image is non-empty and the
    /// principal point lies inside it.
    void validate() const;
};

/// Rectified stereo pair sharing one set of intrinsics.
struct StereoRig {
    CameraIntrinsics intrinsics;
    double baseline = 1.0;  // meters

    void validate() const;
    double focal_baseline() const noexcept { return intrinsics.f * baseline; }
};

/// Camera displacement over one frame interval, expressed in the camera frame.
struct Twist {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();      // meters per frame
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();  // radians per frame

    Eigen::Matrix<double, 6, 1> stacked() const;
    static Twist from_stacked(const Eigen::Matrix<double, 6, 1>& x);
    bool is_finite() const;

    friend bool operator==(const Twist& a, const Twist& b) {
        return a.v == b.v && a.omega == b.omega;
    }
};

struct NormalizedPoint {
    double x = 0.0;
    double y = 0.0;
};

struct SE3Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static SE3Pose identity() { return {}; }
    SE3Pose inverse() const;
    SE3Pose operator*(const SE3Pose& rhs) const;
    Eigen::Vector3d operator*(const Eigen::Vector3d& p) const;
};

/// The two 2x3 matrices of the instantaneous motion field at one point:
/// flow = A v / Z + B omega.
struct MotionMatrices {
    Eigen::Matrix<double, 2, 3> a;
    Eigen::Matrix<double, 2, 3> b;
};

NormalizedPoint normalize_pixel(const CameraIntrinsics& intr, double u, double v);
Eigen::Vector2d denormalize_point(const CameraIntrinsics& intr, NormalizedPoint p);

MotionMatrices motion_matrices(NormalizedPoint p);

/// Z = f b / d. Throws kInvalidInput for d <= 0 or non-finite d.
double disparity_to_depth(const StereoRig& rig, double disparity);
/// d = f b / Z. Throws kInvalidInput for Z <= 0 or non-finite Z.
double depth_to_disparity(const StereoRig& rig, double depth);

/// Rotation angle below which twist_exp switches to Taylor coefficients.
inline constexpr double kSmallAngle = 1e-8;

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

/// SE(3) exponential: Rodrigues rotation from omega, left Jacobian applied to v.
SE3Pose twist_exp(const Twist& t);

/// Angle of a rotation matrix in radians, in [0, pi].
double rotation_angle(const Eigen::Matrix3d& r);

}  // namespace egoflow
