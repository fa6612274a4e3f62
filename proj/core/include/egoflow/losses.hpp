#pragma once

#include <cstddef>

#include "egoflow/fields.hpp"
#include "egoflow/geometry.hpp"
#include "egoflow/ransac.hpp"

namespace egoflow {

/// Which SSIM quantity enters the appearance loss. kDissimilarity uses
/// (1 - SSIM) / 2 so the loss is minimized at identical images; kSimilarity
/// uses SSIM itself.
enum class SsimTerm { kDissimilarity, kSimilarity };

struct LossConfig {
    double epsilon = 1e-3;  // Charbonnier constant
    double alpha = 0.85;    // photometric weight inside the appearance loss
    double lambda1 = 1.0;   // consistency weight
    double lambda2 = 0.1;   // smoothness weight
    int ssim_window = 3;
    double ssim_c1 = 0.01 * 0.01;
    double ssim_c2 = 0.03 * 0.03;
    SsimTerm ssim_term = SsimTerm::kDissimilarity;

    void validate() const;
};

using LossMap = Grid<double>;

/// sqrt(x^2 + eps^2)
double charbonnier(double x, double epsilon);

struct WarpedImage {
    ScalarImage image;
    Mask out_of_bounds;
};

/// Bilinear sample of img at x + offset(x). Sample points outside
/// [0, w-1] x [0, h-1] are flagged and produce 0.
WarpedImage warp_image(const ScalarImage& img, const WarpField& w);

/// 1 where x + offset(x) stays inside the image, 0 otherwise.
Mask occlusion_mask(const WarpField& w);

/// Charbonnier of I_i - warp(I_j). Zero at out-of-bounds pixels.
LossMap photometric_loss(const ScalarImage& image_i, const ScalarImage& image_j,
                         const WarpField& w, const LossConfig& cfg);

/// Windowed SSIM with a box window clipped at the image border.
LossMap ssim_map(const ScalarImage& a, const ScalarImage& b, const LossConfig& cfg);

/// (1 - alpha) * ssim term + alpha * photometric. Zero at out-of-bounds pixels.
LossMap appearance_loss(const ScalarImage& image_i, const ScalarImage& image_j,
                        const WarpField& w, const LossConfig& cfg);

/// rho(fwd_u + bwd_u(x + fwd)) + rho(fwd_v + bwd_v(x + fwd)), with the
/// backward warp sampled bilinearly. Zero where x + fwd leaves the image.
LossMap consistency_loss(const WarpField& fwd, const WarpField& bwd, const LossConfig& cfg);

/// Edge-aware smoothness with forward differences. The horizontal term is
/// absent on the last column and the vertical term on the last row.
LossMap smoothness_loss(const WarpField& w, const ScalarImage& image, const LossConfig& cfg);

struct WarpLossMaps {
    LossMap appearance;
    LossMap consistency;
    LossMap smoothness;
    Mask occlusion;
};

WarpLossMaps warp_loss_maps(const ScalarImage& image_i, const ScalarImage& image_j,
                            const WarpField& fwd, const WarpField& bwd, const LossConfig& cfg);

/// sum_x M_occ (appearance + lambda1 consistency) + lambda2 smoothness.
double total_warp_loss(const ScalarImage& image_i, const ScalarImage& image_j,
                       const WarpField& fwd, const WarpField& bwd, const LossConfig& cfg);

/// Compensated row-major sum of a map, optionally restricted to mask != 0.
double masked_sum(const LossMap& map, const Mask* mask = nullptr);

/// Two stereo pairs at consecutive times with all eight warps.
struct StereoTemporalQuad {
    const ScalarImage& left0;
    const ScalarImage& right0;
    const ScalarImage& left1;
    const ScalarImage& right1;
    const FlowField& flow_left_fwd;   // left0 -> left1
    const FlowField& flow_left_bwd;   // left1 -> left0
    const FlowField& flow_right_fwd;  // right0 -> right1
    const FlowField& flow_right_bwd;  // right1 -> right0
    const DisparityField& disp_left0;   // left0 -> right0
    const DisparityField& disp_right0;  // right0 -> left0
    const DisparityField& disp_left1;
    const DisparityField& disp_right1;
};

/// Sum of total_warp_loss over the four flows and four disparities.
double stereo_temporal_loss(const StereoTemporalQuad& quad, const LossConfig& cfg);

struct ImagePair {
    const ScalarImage& reference;
    const ScalarImage& target;
};

struct RefinementLosses {
    double stereo = 0.0;    // stereo pair warped by disparity recovered from flow
    double temporal = 0.0;  // temporal pair warped by flow predicted from disparity
    std::size_t stereo_pixels = 0;
    std::size_t temporal_pixels = 0;

    double stereo_mean() const { return stereo_pixels ? stereo / stereo_pixels : 0.0; }
    double temporal_mean() const { return temporal_pixels ? temporal / temporal_pixels : 0.0; }
};

/// Appearance losses on the opposite image pairs using the rigid conversions,
/// summed over pixels that are inliers and valid under the conversion.
RefinementLosses refinement_losses(const StereoRig& rig, const Twist& twist,
                                   const FlowField& flow, const DisparityField& disp,
                                   const ImagePair& temporal, const ImagePair& stereo,
                                   const InlierMask& inliers, const LossConfig& cfg);

}  // namespace egoflow
