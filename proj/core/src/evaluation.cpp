#include "egoflow/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "egoflow/error.hpp"

namespace egoflow {

namespace {

class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

Trajectory integrate_trajectory(std::span<const Twist> twists) {
    Trajectory traj;
    traj.poses.reserve(twists.size() + 1);
    traj.poses.push_back(SE3Pose::identity());
    for (const Twist& t : twists) traj.poses.push_back(traj.poses.back() * twist_exp(t));
    return traj;
}

OdometryErrors kitti_odometry_errors(const Trajectory& estimate, const Trajectory& ground_truth) {
    const std::size_t n = ground_truth.size();
    if (estimate.size() != n) throw_invalid("trajectories differ in length");
    if (n < 2) throw Error(ErrorCode::kInsufficientData, "trajectories need at least 2 poses");

    std::vector<double> dist(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        dist[i] = dist[i - 1] + (ground_truth.poses[i].translation -
                                 ground_truth.poses[i - 1].translation).norm();

    OdometryErrors out;
    CompensatedSum t_all, r_all;
    for (double len : kSegmentLengths) {
        SegmentErrors seg;
        seg.length = len;
        CompensatedSum t_sum, r_sum;
        for (std::size_t first = 0; first < n; ++first) {
            // Tolerance absorbs rounding in the accumulated path length.
            const double target = dist[first] + len - 1e-9 * std::max(1.0, len);
            const auto it = std::lower_bound(dist.begin() + static_cast<std::ptrdiff_t>(first),
                                             dist.end(), target);
            if (it == dist.end()) break;
            const std::size_t last = static_cast<std::size_t>(it - dist.begin());
            const double span = dist[last] - dist[first];
            if (!(span > 0.0)) continue;
            const SE3Pose delta_gt =
                ground_truth.poses[first].inverse() * ground_truth.poses[last];
            const SE3Pose delta_est = estimate.poses[first].inverse() * estimate.poses[last];
            const SE3Pose err = delta_est.inverse() * delta_gt;
            const double t_err = err.translation.norm() / span;
            const double r_err = rotation_angle(err.rotation) / span;
            t_sum.add(t_err);
            r_sum.add(r_err);
            t_all.add(t_err);
            r_all.add(r_err);
            ++seg.segments;
        }
        if (seg.segments > 0) {
            seg.t_rel = 100.0 * t_sum.value() / static_cast<double>(seg.segments);
            seg.r_rel = 100.0 * kRadToDeg * r_sum.value() / static_cast<double>(seg.segments);
        }
        out.segments += seg.segments;
        out.per_length.push_back(seg);
    }
    if (out.segments == 0)
        throw Error(ErrorCode::kInsufficientData,
                    "ground-truth path is shorter than the shortest evaluation segment");
    out.t_rel = 100.0 * t_all.value() / static_cast<double>(out.segments);
    out.r_rel = 100.0 * kRadToDeg * r_all.value() / static_cast<double>(out.segments);
    return out;
}

ScaleAlignment scale_align(const Trajectory& estimate, const Trajectory& ground_truth) {
    if (estimate.size() != ground_truth.size()) throw_invalid("trajectories differ in length");
    CompensatedSum num, den;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        num.add(estimate.poses[i].translation.dot(ground_truth.poses[i].translation));
        den.add(estimate.poses[i].translation.squaredNorm());
    }
    if (!(den.value() > 0.0))
        throw Error(ErrorCode::kDegenerate, "cannot scale-align a trajectory without translation");
    ScaleAlignment out;
    out.scale = num.value() / den.value();
    out.aligned = estimate;
    for (auto& p : out.aligned.poses) p.translation *= out.scale;
    return out;
}

FlowErrors flow_errors(const FlowField& pred, const FlowField& gt, const Mask* noc_mask,
                       const Mask* extra_mask) {
    pred.check_shape();
    gt.check_shape();
    if (!pred.u.same_shape(gt.u)) throw_invalid("flow_errors: dimension mismatch");
    if (noc_mask != nullptr && !noc_mask->same_shape(gt.u))
        throw_invalid("flow_errors: noc mask dimension mismatch");
    if (extra_mask != nullptr && !extra_mask->same_shape(gt.u))
        throw_invalid("flow_errors: mask dimension mismatch");

    CompensatedSum epe_all, epe_noc;
    std::size_t out_all = 0, out_noc = 0;
    FlowErrors e;
    for (std::size_t i = 0; i < gt.u.size(); ++i) {
        if (!gt.valid[i]) continue;
        if (extra_mask != nullptr && !(*extra_mask)[i]) continue;
        const double du = pred.u[i] - gt.u[i];
        const double dv = pred.v[i] - gt.v[i];
        const double epe = std::hypot(du, dv);
        const double mag = std::hypot(gt.u[i], gt.v[i]);
        const bool outlier = epe > 3.0 && epe > 0.05 * mag;
        epe_all.add(epe);
        out_all += outlier;
        ++e.pixels_all;
        if (noc_mask == nullptr || (*noc_mask)[i]) {
            epe_noc.add(epe);
            out_noc += outlier;
            ++e.pixels_noc;
        }
    }
    if (e.pixels_all > 0) {
        e.epe_all = epe_all.value() / static_cast<double>(e.pixels_all);
        e.outlier_pct_all = 100.0 * static_cast<double>(out_all) / static_cast<double>(e.pixels_all);
    }
    if (e.pixels_noc > 0) {
        e.epe_noc = epe_noc.value() / static_cast<double>(e.pixels_noc);
        e.outlier_pct_noc = 100.0 * static_cast<double>(out_noc) / static_cast<double>(e.pixels_noc);
    }
    return e;
}

CropRegion garg_crop(int width, int height) {
    return CropRegion{static_cast<int>(0.03594771 * width), static_cast<int>(0.40810811 * height),
                      static_cast<int>(0.96405229 * width), static_cast<int>(0.99189189 * height)};
}

DepthErrors depth_errors(const Grid<double>& pred, const Grid<double>& gt,
                         const DepthEvalOptions& opts) {
    if (!pred.same_shape(gt)) throw_invalid("depth_errors: dimension mismatch");
    if (opts.mask != nullptr && !opts.mask->same_shape(gt))
        throw_invalid("depth_errors: mask dimension mismatch");
    if (!(opts.cap > 0.0)) throw_invalid("depth cap must be positive");

    CropRegion crop{0, 0, gt.width(), gt.height()};
    if (opts.crop) {
        crop.x0 = std::max(0, opts.crop->x0);
        crop.y0 = std::max(0, opts.crop->y0);
        crop.x1 = std::min(gt.width(), opts.crop->x1);
        crop.y1 = std::min(gt.height(), opts.crop->y1);
    }

    CompensatedSum sq, sq_log, abs_rel, sq_rel;
    std::size_t d1 = 0, d2 = 0, d3 = 0, n = 0;
    for (int y = crop.y0; y < crop.y1; ++y) {
        for (int x = crop.x0; x < crop.x1; ++x) {
            const double g = gt(x, y);
            if (!(g > 0.0 && g <= opts.cap)) continue;
            if (opts.mask != nullptr && !(*opts.mask)(x, y)) continue;
            const double p = std::max(pred(x, y), kMinPredictedDepth);
            const double diff = p - g;
            const double log_diff = std::log(p) - std::log(g);
            sq.add(diff * diff);
            sq_log.add(log_diff * log_diff);
            abs_rel.add(std::abs(diff) / g);
            sq_rel.add(diff * diff / g);
            const double ratio = std::max(p / g, g / p);
            d1 += ratio < 1.25;
            d2 += ratio < 1.25 * 1.25;
            d3 += ratio < 1.25 * 1.25 * 1.25;
            ++n;
        }
    }
    if (n == 0) throw Error(ErrorCode::kInsufficientData, "no ground-truth depth inside the cap");
    const double count = static_cast<double>(n);
    DepthErrors e;
    e.rmse = std::sqrt(sq.value() / count);
    e.rmse_log = std::sqrt(sq_log.value() / count);
    e.abs_rel = abs_rel.value() / count;
    e.sq_rel = sq_rel.value() / count;
    e.delta1 = static_cast<double>(d1) / count;
    e.delta2 = static_cast<double>(d2) / count;
    e.delta3 = static_cast<double>(d3) / count;
    e.pixels = n;
    return e;
}

Grid<double> depth_from_disparity(const StereoRig& rig, const DisparityField& disp) {
    disp.check_shape();
    Grid<double> depth(disp.width(), disp.height(), 0.0);
    for (std::size_t i = 0; i < depth.size(); ++i)
        if (disp.valid[i] && disp.d[i] > 0.0) depth[i] = disparity_to_depth(rig, disp.d[i]);
    return depth;
}

}  // namespace egoflow
