#include "egoflow/losses.hpp"

#include <algorithm>
#include <cmath>

#include "egoflow/error.hpp"
#include "egoflow/motion_field.hpp"
#include "egoflow/parallel.hpp"

namespace egoflow {

void LossConfig::validate() const {
    if (!(epsilon > 0.0)) throw_invalid("Charbonnier epsilon must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw_invalid("alpha must lie in [0, 1]");
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw_invalid("loss weights must be non-negative");
    if (ssim_window < 3 || ssim_window % 2 == 0) throw_invalid("SSIM window must be odd and >= 3");
    if (!(ssim_c1 > 0.0) || !(ssim_c2 > 0.0)) throw_invalid("SSIM constants must be positive");
}

double charbonnier(double x, double epsilon) { return std::sqrt(x * x + epsilon * epsilon); }

namespace {

template <typename A, typename B>
void require_same(const Grid<A>& a, const Grid<B>& b, const char* what) {
    if (!a.same_shape(b)) throw_invalid(std::string(what) + ": dimension mismatch");
}

void require_same(const WarpField& w, const ScalarImage& img, const char* what) {
    if (!w.du.same_shape(w.dv) || !w.du.same_shape(img))
        throw_invalid(std::string(what) + ": dimension mismatch");
}

bool in_bounds(double sx, double sy, int w, int h) {
    return sx >= 0.0 && sy >= 0.0 && sx <= w - 1 && sy <= h - 1;
}

// Bilinear sample; caller guarantees in_bounds(sx, sy).
double bilinear(const Grid<double>& g, double sx, double sy) {
    const int w = g.width();
    const int h = g.height();
    int x0 = static_cast<int>(std::floor(sx));
    int y0 = static_cast<int>(std::floor(sy));
    x0 = std::clamp(x0, 0, std::max(0, w - 2));
    y0 = std::clamp(y0, 0, std::max(0, h - 2));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    return (1.0 - fx) * (1.0 - fy) * g(x0, y0) + fx * (1.0 - fy) * g(x1, y0) +
           (1.0 - fx) * fy * g(x0, y1) + fx * fy * g(x1, y1);
}

// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

template <typename Fn>
void for_each_pixel(int width, int height, Fn&& fn) {
    parallel_for(static_cast<std::size_t>(height), [&](std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y < y1; ++y)
            for (int x = 0; x < width; ++x) fn(x, static_cast<int>(y));
    });
}

}  // namespace

WarpedImage warp_image(const ScalarImage& img, const WarpField& w) {
    require_same(w, img, "warp_image");
    WarpedImage out{ScalarImage(img.width(), img.height()), Mask(img.width(), img.height(), 0)};
    for_each_pixel(img.width(), img.height(), [&](int x, int y) {
        const double sx = x + w.du(x, y);
        const double sy = y + w.dv(x, y);
        if (in_bounds(sx, sy, img.width(), img.height()))
            out.image(x, y) = bilinear(img, sx, sy);
        else
            out.out_of_bounds(x, y) = 1;
    });
    return out;
}

Mask occlusion_mask(const WarpField& w) {
    require_same(w.du, w.dv, "occlusion_mask");
    Mask m(w.width(), w.height(), 0);
    for_each_pixel(w.width(), w.height(), [&](int x, int y) {
        m(x, y) = in_bounds(x + w.du(x, y), y + w.dv(x, y), w.width(), w.height()) ? 1 : 0;
    });
    return m;
}

LossMap photometric_loss(const ScalarImage& image_i, const ScalarImage& image_j,
                         const WarpField& w, const LossConfig& cfg) {
    cfg.validate();
    require_same(image_i, image_j, "photometric_loss");
    const WarpedImage warped = warp_image(image_j, w);
    LossMap out(image_i.width(), image_i.height());
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!warped.out_of_bounds[i])
            out[i] = charbonnier(image_i[i] - warped.image[i], cfg.epsilon);
    return out;
}

LossMap ssim_map(const ScalarImage& a, const ScalarImage& b, const LossConfig& cfg) {
    cfg.validate();
    require_same(a, b, "ssim_map");
    const int w = a.width();
    const int h = a.height();
    if (w < cfg.ssim_window || h < cfg.ssim_window)
        throw_invalid("image is smaller than the SSIM window");
    const int r = cfg.ssim_window / 2;
    LossMap out(w, h);
    for_each_pixel(w, h, [&](int x, int y) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        int n = 0;
        for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
            for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                const double pa = a(xx, yy);
                const double pb = b(xx, yy);
                sa += pa;
                sb += pb;
                saa += pa * pa;
                sbb += pb * pb;
                sab += pa * pb;
                ++n;
            }
        }
        const double mu_a = sa / n;
        const double mu_b = sb / n;
        const double var_a = saa / n - mu_a * mu_a;
        const double var_b = sbb / n - mu_b * mu_b;
        const double cov = sab / n - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + cfg.ssim_c1) * (2.0 * cov + cfg.ssim_c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + cfg.ssim_c1) * (var_a + var_b + cfg.ssim_c2);
        out(x, y) = num / den;
    });
    return out;
}

LossMap appearance_loss(const ScalarImage& image_i, const ScalarImage& image_j,
                        const WarpField& w, const LossConfig& cfg) {
    cfg.validate();
    require_same(image_i, image_j, "appearance_loss");
    const WarpedImage warped = warp_image(image_j, w);
    const LossMap ssim = ssim_map(image_i, warped.image, cfg);
    LossMap out(image_i.width(), image_i.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (warped.out_of_bounds[i]) continue;
        const double structural =
            cfg.ssim_term == SsimTerm::kDissimilarity ? 0.5 * (1.0 - ssim[i]) : ssim[i];
        const double photo = charbonnier(image_i[i] - warped.image[i], cfg.epsilon);
        out[i] = (1.0 - cfg.alpha) * structural + cfg.alpha * photo;
    }
    return out;
}

LossMap consistency_loss(const WarpField& fwd, const WarpField& bwd, const LossConfig& cfg) {
    cfg.validate();
    require_same(fwd.du, fwd.dv, "consistency_loss");
    require_same(fwd.du, bwd.du, "consistency_loss");
    require_same(bwd.du, bwd.dv, "consistency_loss");
    const int w = fwd.width();
    const int h = fwd.height();
    LossMap out(w, h);
    for_each_pixel(w, h, [&](int x, int y) {
        const double sx = x + fwd.du(x, y);
        const double sy = y + fwd.dv(x, y);
        if (!in_bounds(sx, sy, w, h)) return;
        const double ru = fwd.du(x, y) + bilinear(bwd.du, sx, sy);
        const double rv = fwd.dv(x, y) + bilinear(bwd.dv, sx, sy);
        out(x, y) = charbonnier(ru, cfg.epsilon) + charbonnier(rv, cfg.epsilon);
    });
    return out;
}

LossMap smoothness_loss(const WarpField& w, const ScalarImage& image, const LossConfig& cfg) {
    cfg.validate();
    require_same(w, image, "smoothness_loss");
    const int width = w.width();
    const int height = w.height();
    LossMap out(width, height);
    const double eps = cfg.epsilon;
    for_each_pixel(width, height, [&](int x, int y) {
        double acc = 0.0;
        if (x + 1 < width) {
            const double weight = std::exp(-std::abs(image(x + 1, y) - image(x, y)));
            acc += charbonnier((w.du(x + 1, y) - w.du(x, y)) * weight, eps);
            acc += charbonnier((w.dv(x + 1, y) - w.dv(x, y)) * weight, eps);
        }
        if (y + 1 < height) {
            const double weight = std::exp(-std::abs(image(x, y + 1) - image(x, y)));
            acc += charbonnier((w.du(x, y + 1) - w.du(x, y)) * weight, eps);
            acc += charbonnier((w.dv(x, y + 1) - w.dv(x, y)) * weight, eps);
        }
        out(x, y) = acc;
    });
    return out;
}

WarpLossMaps warp_loss_maps(const ScalarImage& image_i, const ScalarImage& image_j,
                            const WarpField& fwd, const WarpField& bwd, const LossConfig& cfg) {
    return WarpLossMaps{appearance_loss(image_i, image_j, fwd, cfg),
                        consistency_loss(fwd, bwd, cfg), smoothness_loss(fwd, image_i, cfg),
                        occlusion_mask(fwd)};
}

double total_warp_loss(const ScalarImage& image_i, const ScalarImage& image_j,
                       const WarpField& fwd, const WarpField& bwd, const LossConfig& cfg) {
    const WarpLossMaps maps = warp_loss_maps(image_i, image_j, fwd, bwd, cfg);
    CompensatedSum sum;
    for (std::size_t i = 0; i < maps.appearance.size(); ++i) {
        const double occ = maps.occlusion[i] ? 1.0 : 0.0;
        sum.add(occ * (maps.appearance[i] + cfg.lambda1 * maps.consistency[i]) +
                cfg.lambda2 * maps.smoothness[i]);
    }
    return sum.value();
}

double masked_sum(const LossMap& map, const Mask* mask) {
    if (mask != nullptr) require_same(map, *mask, "masked_sum");
    CompensatedSum sum;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (mask == nullptr || (*mask)[i]) sum.add(map[i]);
    return sum.value();
}

double stereo_temporal_loss(const StereoTemporalQuad& q, const LossConfig& cfg) {
    const WarpField lf = WarpField::from_flow(q.flow_left_fwd);
    const WarpField lb = WarpField::from_flow(q.flow_left_bwd);
    const WarpField rf = WarpField::from_flow(q.flow_right_fwd);
    const WarpField rb = WarpField::from_flow(q.flow_right_bwd);
    const WarpField l0 = WarpField::from_disparity(q.disp_left0, -1.0);
    const WarpField r0 = WarpField::from_disparity(q.disp_right0, +1.0);
    const WarpField l1 = WarpField::from_disparity(q.disp_left1, -1.0);
    const WarpField r1 = WarpField::from_disparity(q.disp_right1, +1.0);

    CompensatedSum sum;
    sum.add(total_warp_loss(q.left0, q.left1, lf, lb, cfg));
    sum.add(total_warp_loss(q.left1, q.left0, lb, lf, cfg));
    sum.add(total_warp_loss(q.right0, q.right1, rf, rb, cfg));
    sum.add(total_warp_loss(q.right1, q.right0, rb, rf, cfg));
    sum.add(total_warp_loss(q.left0, q.right0, l0, r0, cfg));
    sum.add(total_warp_loss(q.right0, q.left0, r0, l0, cfg));
    sum.add(total_warp_loss(q.left1, q.right1, l1, r1, cfg));
    sum.add(total_warp_loss(q.right1, q.left1, r1, l1, cfg));
    return sum.value();
}

RefinementLosses refinement_losses(const StereoRig& rig, const Twist& twist,
                                   const FlowField& flow, const DisparityField& disp,
                                   const ImagePair& temporal, const ImagePair& stereo,
                                   const InlierMask& inliers, const LossConfig& cfg) {
    cfg.validate();
    flow.check_shape();
    disp.check_shape();
    require_same(flow.u, disp.d, "refinement_losses");
    require_same(flow.u, inliers.inlier, "refinement_losses");
    require_same(flow.u, temporal.reference, "refinement_losses");
    require_same(flow.u, stereo.reference, "refinement_losses");

    RefinementLosses out;
    if (popcount(inliers.inlier) == 0) return out;

    const auto accumulate = [&](const LossMap& map, const Mask& valid, const WarpField& w,
                                double& total, std::size_t& count) {
        const Mask inside = occlusion_mask(w);
        CompensatedSum sum;
        for (std::size_t i = 0; i < map.size(); ++i) {
            if (!inliers.inlier[i] || !valid[i] || !inside[i]) continue;
            sum.add(map[i]);
            ++count;
        }
        total = sum.value();
    };

    const DisparityField disp_hat = disparity_from_flow(rig, twist, flow);
    const WarpField stereo_warp = WarpField::from_disparity(disp_hat, -1.0);
    accumulate(appearance_loss(stereo.reference, stereo.target, stereo_warp, cfg),
               disp_hat.valid, stereo_warp, out.stereo, out.stereo_pixels);

    const FlowField flow_hat = predict_flow_field(rig, twist, disp);
    const WarpField temporal_warp = WarpField::from_flow(flow_hat);
    accumulate(appearance_loss(temporal.reference, temporal.target, temporal_warp, cfg),
               flow_hat.valid, temporal_warp, out.temporal, out.temporal_pixels);
    return out;
}

}  // namespace egoflow
