#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "egoflow/fields.hpp"
#include "egoflow/geometry.hpp"

namespace egoflow {

/// World-from-camera poses, one per frame; the first is the identity.
struct Trajectory {
    std::vector<SE3Pose> poses;

    std::size_t size() const noexcept { return poses.size(); }
};

/// pose_0 = identity, pose_{k+1} = pose_k * twist_exp(twist_k).
Trajectory integrate_trajectory(std::span<const Twist> twists);

/// Sub-sequence lengths in meters used by the odometry metric.
inline constexpr std::array<double, 8> kSegmentLengths{100, 200, 300, 400, 500, 600, 700, 800};

struct SegmentErrors {
    double length = 0.0;
    std::size_t segments = 0;
    double t_rel = 0.0;  // percent
    double r_rel = 0.0;  // degrees per 100 m
};

struct OdometryErrors {
    double t_rel = 0.0;  // percent
    double r_rel = 0.0;  // degrees per 100 m
    std::size_t segments = 0;
    std::vector<SegmentErrors> per_length;
};

/// Average relative drift over every start frame and every segment length,
/// with segment ends found on the ground-truth path. Each error is divided by
/// the ground-truth path length actually spanned by the segment.
/// Throws kInsufficientData when no segment fits.
OdometryErrors kitti_odometry_errors(const Trajectory& estimate, const Trajectory& ground_truth);

struct ScaleAlignment {
    double scale = 1.0;
    Trajectory aligned;
};

/// Global scale s minimizing sum ||s t_i - t_i^gt||^2; rotations untouched.
/// Throws kDegenerate when every estimated translation is zero.
ScaleAlignment scale_align(const Trajectory& estimate, const Trajectory& ground_truth);

struct FlowErrors {
    double epe_noc = 0.0;
    double epe_all = 0.0;
    double outlier_pct_noc = 0.0;
    double outlier_pct_all = 0.0;
    std::size_t pixels_noc = 0;
    std::size_t pixels_all = 0;
};

/// End-point error and outlier percentage (EPE > 3 px and > 5% of |gt|) over
/// valid ground-truth pixels, optionally restricted to an extra mask.
/// An empty noc mask pointer means every pixel is non-occluded.
FlowErrors flow_errors(const FlowField& pred, const FlowField& gt, const Mask* noc_mask,
                       const Mask* extra_mask = nullptr);

struct DepthErrors {
    double rmse = 0.0;
    double rmse_log = 0.0;
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    std::size_t pixels = 0;
};

struct CropRegion {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
};

/// The customary crop for the Eigen split evaluation (fractions of the image).
CropRegion garg_crop(int width, int height);

/// Predicted depths below this are clamped before the metrics.
inline constexpr double kMinPredictedDepth = 1e-3;

struct DepthEvalOptions {
    double cap = 50.0;  // meters
    std::optional<CropRegion> crop;
    const Mask* mask = nullptr;
};

/// Depth metrics over pixels with 0 < gt <= cap. Depth grids are in meters,
/// non-positive ground truth is ignored. Throws kInsufficientData when no
/// pixel qualifies.
DepthErrors depth_errors(const Grid<double>& pred, const Grid<double>& gt,
                         const DepthEvalOptions& opts = {});

/// Depth grid in meters from disparity; invalid pixels become 0.
Grid<double> depth_from_disparity(const StereoRig& rig, const DisparityField& disp);

}  // namespace egoflow
