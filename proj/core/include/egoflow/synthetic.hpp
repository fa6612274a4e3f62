#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "egoflow/fields.hpp"
#include "egoflow/geometry.hpp"

namespace egoflow {

/// Ranges for randomly drawn twists. Forward motion dominates: vx in
/// +-0.3 v_max, vy in +-0.1 v_max, vz in [0.3, 1] v_max, each omega
/// component in +-omega_max.
struct TwistBounds {
    double v_max = 1.0;
    double omega_max = 0.02;
};

struct SceneConfig {
    int width = 64;
    int height = 64;
    StereoRig rig;
    double depth_min = 5.0;
    double depth_max = 40.0;
    std::optional<Twist> twist;  // drawn from random_twist when empty
    TwistBounds random_twist;
    int object_count = 0;
    double object_fraction = 0.3;  // total image area covered by objects
    Twist object_offset_max{Eigen::Vector3d(1.0, 0.3, 1.0), Eigen::Vector3d(0.02, 0.02, 0.02)};
    double object_min_separation_px = 3.0;
    double noise_sigma_flow = 0.0;  // pixels
    double noise_sigma_disp = 0.0;  // pixels
    double outlier_fraction = 0.0;
    bool with_images = false;
    std::uint64_t seed = 0;

    /// Config for a width x height scene whose rig has a KITTI-like field of
    /// view (f = 0.58 width) and a 0.54 m baseline.
    static SceneConfig with_default_rig(int width, int height);
    void validate() const;
};

struct ObjectRegion {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open pixel ranges
    Twist twist;

    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct SceneImages {
    ScalarImage left0;
    ScalarImage right0;
    ScalarImage left1;
    ScalarImage right1;
};

struct SyntheticScene {
    StereoRig rig;
    Twist twist_gt;
    DisparityField disparity_gt;  // clean left disparity at t0
    FlowField flow_gt;            // clean left flow t0 -> t1, objects included
    DisparityField disparity;     // observed: gt plus perturbation
    FlowField flow;               // observed: gt plus perturbation
    Mask object_mask;             // 1 on independently moving pixels
    Mask outlier_mask;            // 1 on gross flow outliers
    std::vector<ObjectRegion> objects;
    std::optional<SceneImages> images;

    /// Pixels neither on an object nor replaced by a gross outlier.
    Mask clean_mask() const;
};

/// Deterministic for a fixed config and seed.
SyntheticScene generate(const SceneConfig& cfg);

/// Adds i.i.d. Gaussian noise to the observed fields and replaces exactly
/// floor(outlier_fraction * pixels) flow vectors with uniform gross outliers
/// of magnitude up to 50 px. Disparities pushed to <= 0 become invalid.
SyntheticScene perturb(SyntheticScene scene, double noise_sigma_flow, double noise_sigma_disp,
                       double outlier_fraction, std::uint64_t seed);

}  // namespace egoflow
