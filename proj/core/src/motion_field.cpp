#include "egoflow/motion_field.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "egoflow/error.hpp"
#include "egoflow/parallel.hpp"

namespace egoflow {

namespace {

void check_dims(const CameraIntrinsics& intr, int width, int height, const char* what) {
    if (intr.width != width || intr.height != height)
        throw_invalid(std::string(what) + " dimensions do not match the calibration");
}

// Writes the two rows contributed by one sample into a design matrix.
template <typename Design, typename Rhs>
void fill_rows(const MotionSample& s, Eigen::Index row, Design& m, Rhs& rhs) {
    const MotionMatrices mm = motion_matrices(s.point);
    const double inv_z = 1.0 / s.depth;
    m.template block<2, 3>(row, 0) = mm.a * inv_z;
    m.template block<2, 3>(row, 3) = mm.b;
    rhs.template segment<2>(row) = s.flow;
}

double condition_of(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0) || !std::isfinite(s(0))) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

}  // namespace

Eigen::Vector2d predict_flow_point(const Twist& t, NormalizedPoint p, double depth) {
    if (!(std::isfinite(depth) && depth > 0.0)) throw_invalid("depth must be positive");
    const MotionMatrices m = motion_matrices(p);
    return (m.a * t.v) / depth + m.b * t.omega;
}

FlowField predict_flow_field(const StereoRig& rig, const Twist& t, const DisparityField& disp) {
    disp.check_shape();
    const CameraIntrinsics& intr = rig.intrinsics;
    check_dims(intr, disp.width(), disp.height(), "disparity");
    FlowField flow(disp.width(), disp.height());
    const int w = disp.width();
    parallel_for(disp.d.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double d = disp.d[i];
            if (!disp.valid[i] || !(d > 0.0)) {
                flow.valid[i] = 0;
                continue;
            }
            const int x = static_cast<int>(i % static_cast<std::size_t>(w));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w));
            const NormalizedPoint p = normalize_pixel(intr, x, y);
            const Eigen::Vector2d f = predict_flow_point(t, p, disparity_to_depth(rig, d));
            flow.u[i] = intr.f * f.x();
            flow.v[i] = intr.f * f.y();
        }
    });
    return flow;
}

std::optional<Twist> solve_twist_minimal(std::span<const MotionSample, 3> samples) {
    Eigen::Matrix<double, 6, 6> m;
    Eigen::Matrix<double, 6, 1> rhs;
    for (Eigen::Index k = 0; k < 3; ++k) {
        if (!(samples[k].depth > 0.0)) return std::nullopt;
        fill_rows(samples[k], 2 * k, m, rhs);
    }
    if (!m.allFinite() || !rhs.allFinite()) return std::nullopt;
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(m);
    const auto& s = svd.singularValues();
    if (!(s(5) > 0.0) || s(0) / s(5) > kMaxCondition) return std::nullopt;
    const Eigen::Matrix<double, 6, 1> x = m.partialPivLu().solve(rhs);
    if (!x.allFinite()) return std::nullopt;
    return Twist::from_stacked(x);
}

Twist solve_twist_ls(std::span<const MotionSample> samples) {
    if (samples.size() < 3)
        throw Error(ErrorCode::kInsufficientData, "least-squares twist needs at least 3 samples");
    if (samples.size() == 3) {
        auto t = solve_twist_minimal(samples.first<3>());
        if (!t) throw Error(ErrorCode::kDegenerate, "degenerate minimal sample");
        return *t;
    }
    const auto rows = static_cast<Eigen::Index>(2 * samples.size());
    Eigen::MatrixXd m(rows, 6);
    Eigen::VectorXd rhs(rows);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (!(samples[k].depth > 0.0)) throw_invalid("sample depth must be positive");
        fill_rows(samples[k], static_cast<Eigen::Index>(2 * k), m, rhs);
    }
    if (!m.allFinite() || !rhs.allFinite()) throw_invalid("non-finite motion sample");

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd r =
        qr.matrixQR().topLeftCorner(6, 6).triangularView<Eigen::Upper>();
    if (condition_of(r) > kMaxCondition)
        throw Error(ErrorCode::kDegenerate, "rank-deficient motion-field system");
    const Eigen::VectorXd x = qr.solve(rhs);
    return Twist::from_stacked(x.head<6>());
}

DisparityField disparity_from_flow(const StereoRig& rig, const Twist& t, const FlowField& flow) {
    flow.check_shape();
    const CameraIntrinsics& intr = rig.intrinsics;
    check_dims(intr, flow.width(), flow.height(), "flow");
    const double fb = rig.focal_baseline();
    DisparityField disp(flow.width(), flow.height());
    const int w = flow.width();
    parallel_for(flow.u.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            disp.valid[i] = 0;
            if (!flow.valid[i]) continue;
            const int x = static_cast<int>(i % static_cast<std::size_t>(w));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w));
            const MotionMatrices m = motion_matrices(normalize_pixel(intr, x, y));
            const Eigen::Vector2d v1 = (m.a * t.v) / fb;
            if (!(v1.norm() >= kMinParallax)) continue;
            const Eigen::Vector2d f(flow.u[i] / intr.f, flow.v[i] / intr.f);
            const Eigen::Vector2d v2 = f - m.b * t.omega;
            const double d = v2.dot(v1) / v1.dot(v1);
            if (!(d > 0.0) || !std::isfinite(d)) continue;
            disp.d[i] = d;
            disp.valid[i] = 1;
        }
    });
    return disp;
}

}  // namespace egoflow
