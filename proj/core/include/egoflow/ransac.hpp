#pragma once

#include <cstddef>
#include <cstdint>

#include "egoflow/fields.hpp"
#include "egoflow/geometry.hpp"

namespace egoflow {

/// How the 2D flow residual is reduced to a scalar before thresholding.
enum class ResidualNorm { kEuclidean, kMaxAbs };

struct RansacConfig {
    int iterations = 100;
    double threshold_px = 1.0;
    std::uint64_t seed = 0;
    int min_inliers = 6;
    /// Least-squares polish over the winning inlier set.
    bool refit = true;
    ResidualNorm norm = ResidualNorm::kEuclidean;

    void validate() const;
};

struct InlierMask {
    Mask inlier;

    int width() const noexcept { return inlier.width(); }
    int height() const noexcept { return inlier.height(); }
    std::size_t count() const { return popcount(inlier); }
};

struct PoseEstimate {
    Twist twist;
    InlierMask mask;
    std::size_t inlier_count = 0;
    double inlier_fraction = 0.0;   // over jointly valid pixels
    double mean_residual_px = 0.0;  // over inliers
};

/// Pixel is an inlier iff valid in both fields, disparity > 0 and the pixel
/// residual between predicted and input flow is below threshold_px.
InlierMask score_inliers(const StereoRig& rig, const Twist& t, const FlowField& flow,
                         const DisparityField& disp, double threshold_px,
                         ResidualNorm norm = ResidualNorm::kEuclidean);

/// Three-point RANSAC over the motion-field equation followed by an optional
/// least-squares refit on the best inlier set. Deterministic for a fixed seed
/// and independent of the worker thread count.
///
/// Throws kInsufficientData when fewer than cfg.min_inliers pixels are valid in
/// both fields, kEstimationFailed when no usable hypothesis is found.
PoseEstimate estimate_pose_ransac(const StereoRig& rig, const FlowField& flow,
                                  const DisparityField& disp, const RansacConfig& cfg);

}  // namespace egoflow
