#include "egoflow/ransac.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "egoflow/error.hpp"
#include "egoflow/motion_field.hpp"
#include "egoflow/parallel.hpp"

namespace egoflow {

void RansacConfig::validate() const {
    if (iterations < 1) throw_invalid("RANSAC needs at least one iteration");
    if (!(threshold_px > 0.0) || !std::isfinite(threshold_px))
        throw_invalid("inlier threshold must be positive");
    if (min_inliers < 3) throw_invalid("min_inliers must be at least 3");
}

namespace {

// A jointly valid pixel with its motion-field rows precomputed.
struct Candidate {
    std::size_t pixel = 0;
    MotionSample sample;
    Eigen::Matrix<double, 2, 3> a_over_z;
    Eigen::Matrix<double, 2, 3> b;
};

struct Score {
    std::size_t count = 0;
    double residual_sum = 0.0;
};

struct Hypothesis {
    bool usable = false;
    Twist twist;
    Score score;
};

void check_inputs(const StereoRig& rig, const FlowField& flow, const DisparityField& disp) {
    flow.check_shape();
    disp.check_shape();
    if (!flow.u.same_shape(disp.d)) throw_invalid("flow and disparity dimensions differ");
    if (rig.intrinsics.width != flow.width() || rig.intrinsics.height != flow.height())
        throw_invalid("field dimensions do not match the calibration");
}

std::vector<Candidate> collect_candidates(const StereoRig& rig, const FlowField& flow,
                                          const DisparityField& disp) {
    const CameraIntrinsics& intr = rig.intrinsics;
    const int w = flow.width();
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        const double d = disp.d[i];
        if (!flow.valid[i] || !disp.valid[i] || !(d > 0.0) || !std::isfinite(d)) continue;
        if (!std::isfinite(flow.u[i]) || !std::isfinite(flow.v[i])) continue;
        Candidate c;
        c.pixel = i;
        const int x = static_cast<int>(i % static_cast<std::size_t>(w));
        const int y = static_cast<int>(i / static_cast<std::size_t>(w));
        c.sample.point = normalize_pixel(intr, x, y);
        c.sample.depth = disparity_to_depth(rig, d);
        c.sample.flow = Eigen::Vector2d(flow.u[i] / intr.f, flow.v[i] / intr.f);
        const MotionMatrices m = motion_matrices(c.sample.point);
        c.a_over_z = m.a / c.sample.depth;
        c.b = m.b;
        out.push_back(c);
    }
    return out;
}

double residual_px(const Candidate& c, const Twist& t, double f, ResidualNorm norm) {
    const Eigen::Vector2d r = f * (c.a_over_z * t.v + c.b * t.omega - c.sample.flow);
    return norm == ResidualNorm::kEuclidean ? r.norm() : r.cwiseAbs().maxCoeff();
}

Score score_candidates(const std::vector<Candidate>& cands, const Twist& t, double f,
                       double threshold, ResidualNorm norm, Mask* mask) {
    Score s;
    for (const Candidate& c : cands) {
        const double r = residual_px(c, t, f, norm);
        if (r < threshold) {
            ++s.count;
            s.residual_sum += r;
            if (mask != nullptr) (*mask)[c.pixel] = 1;
        }
    }
    return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform integer in [0, n) by rejection; portable across standard libraries.
std::size_t draw_below(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

bool better(const Score& a, const Score& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.count == 0) return false;
    const double ma = a.residual_sum / static_cast<double>(a.count);
    const double mb = b.residual_sum / static_cast<double>(b.count);
    return ma < mb;
}

}  // namespace

InlierMask score_inliers(const StereoRig& rig, const Twist& t, const FlowField& flow,
                         const DisparityField& disp, double threshold_px, ResidualNorm norm) {
    check_inputs(rig, flow, disp);
    if (!(threshold_px > 0.0)) throw_invalid("inlier threshold must be positive");
    const auto cands = collect_candidates(rig, flow, disp);
    InlierMask out{Mask(flow.width(), flow.height(), 0)};
    score_candidates(cands, t, rig.intrinsics.f, threshold_px, norm, &out.inlier);
    return out;
}

PoseEstimate estimate_pose_ransac(const StereoRig& rig, const FlowField& flow,
                                  const DisparityField& disp, const RansacConfig& cfg) {
    cfg.validate();
    rig.validate();
    check_inputs(rig, flow, disp);
    const auto cands = collect_candidates(rig, flow, disp);
    if (cands.size() < static_cast<std::size_t>(cfg.min_inliers))
        throw Error(ErrorCode::kInsufficientData,
                    "only " + std::to_string(cands.size()) +
                        " pixels are valid in both flow and disparity");

    const double f = rig.intrinsics.f;
    const std::uint64_t base_seed = splitmix64(cfg.seed);
    std::vector<Hypothesis> hyps(static_cast<std::size_t>(cfg.iterations));
    parallel_for(hyps.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t it = begin; it < end; ++it) {
            std::mt19937_64 rng(base_seed ^ static_cast<std::uint64_t>(it));
            std::array<std::size_t, 3> idx{};
            idx[0] = draw_below(rng, cands.size());
            do idx[1] = draw_below(rng, cands.size()); while (idx[1] == idx[0]);
            do idx[2] = draw_below(rng, cands.size()); while (idx[2] == idx[0] || idx[2] == idx[1]);
            const std::array<MotionSample, 3> minimal{cands[idx[0]].sample, cands[idx[1]].sample,
                                                      cands[idx[2]].sample};
            auto twist = solve_twist_minimal(minimal);
            if (!twist) continue;
            hyps[it].usable = true;
            hyps[it].twist = *twist;
            hyps[it].score = score_candidates(cands, *twist, f, cfg.threshold_px, cfg.norm, nullptr);
        }
    });

    const Hypothesis* best = nullptr;
    for (const Hypothesis& h : hyps) {
        if (!h.usable) continue;
        if (best == nullptr || better(h.score, best->score)) best = &h;
    }
    if (best == nullptr)
        throw Error(ErrorCode::kEstimationFailed, "every RANSAC sample was degenerate");
    if (best->score.count < static_cast<std::size_t>(cfg.min_inliers))
        throw Error(ErrorCode::kEstimationFailed,
                    "best hypothesis has only " + std::to_string(best->score.count) + " inliers");

    Twist twist = best->twist;
    if (cfg.refit) {
        std::vector<MotionSample> inliers;
        inliers.reserve(best->score.count);
        for (const Candidate& c : cands)
            if (residual_px(c, twist, f, cfg.norm) < cfg.threshold_px) inliers.push_back(c.sample);
        twist = solve_twist_ls(inliers);
    }

    PoseEstimate est;
    est.twist = twist;
    est.mask.inlier = Mask(flow.width(), flow.height(), 0);
    const Score final_score = score_candidates(cands, twist, f, cfg.threshold_px, cfg.norm,
                                               &est.mask.inlier);
    est.inlier_count = final_score.count;
    est.inlier_fraction =
        static_cast<double>(final_score.count) / static_cast<double>(cands.size());
    est.mean_residual_px = final_score.count == 0
                               ? 0.0
                               : final_score.residual_sum / static_cast<double>(final_score.count);
    return est;
}

}  // namespace egoflow
