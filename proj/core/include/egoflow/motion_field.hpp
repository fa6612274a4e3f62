#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "egoflow/fields.hpp"
#include "egoflow/geometry.hpp"

namespace egoflow {

/// One point of the motion-field linear system. Flow is in normalized units.
struct MotionSample {
    NormalizedPoint point;
    double depth = 1.0;  // meters
    Eigen::Vector2d flow = Eigen::Vector2d::Zero();
};

/// Design matrices whose condition number exceeds this are rejected.
inline constexpr double kMaxCondition = 1e10;

/// ||A v|| / (f b) below this marks a pixel as depth-unobservable.
inline constexpr double kMinParallax = 1e-12;

/// Instantaneous flow (A v) / Z + B omega in normalized units.
/// Throws kInvalidInput for depth <= 0.
Eigen::Vector2d predict_flow_point(const Twist& t, NormalizedPoint p, double depth);

/// Rigid flow in pixels from a disparity map. Invalid disparity gives invalid flow.
FlowField predict_flow_field(const StereoRig& rig, const Twist& t, const DisparityField& disp);

/// Exact solve from three samples. Returns nullopt when the 6x6 system is
/// degenerate (condition number above kMaxCondition or non-finite).
std::optional<Twist> solve_twist_minimal(std::span<const MotionSample, 3> samples);

/// Least-squares twist over N >= 3 samples. Throws kDegenerate for a
/// rank-deficient system and kInsufficientData for fewer than 3 samples.
Twist solve_twist_ls(std::span<const MotionSample> samples);

/// Per-pixel closed-form disparity from flow and a known twist. Pixels with
/// ||A v|| / (f b) < kMinParallax or a non-positive estimate are invalid.
DisparityField disparity_from_flow(const StereoRig& rig, const Twist& t, const FlowField& flow);

}  // namespace egoflow
