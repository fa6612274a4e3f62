#include "egoflow/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "egoflow/error.hpp"
#include "egoflow/motion_field.hpp"

namespace egoflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxOutlierFlow = 50.0;

// Independent generator streams so toggling one feature leaves the others intact.
enum Stream : std::uint64_t { kDepth = 1, kTwist, kObjects, kNoise, kTexture };

std::mt19937_64 stream(std::uint64_t seed, Stream s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Wave {
    double kx, ky, phase, amplitude;
};

// Sum of low-frequency sinusoids in continuous pixel coordinates.
class SmoothField {
public:
    SmoothField() = default;
    SmoothField(std::mt19937_64& rng, int width, int height, int terms, double min_wavelength,
                double max_wavelength, double total_amplitude) {
        std::vector<double> raw;
        for (int k = 0; k < terms; ++k) {
            const double lambda = uniform(rng, min_wavelength, max_wavelength);
            const double angle = uniform(rng, 0.0, kTwoPi);
            Wave w{};
            w.kx = kTwoPi * std::cos(angle) / lambda;
            w.ky = kTwoPi * std::sin(angle) / lambda;
            w.phase = uniform(rng, 0.0, kTwoPi);
            w.amplitude = uniform(rng, 0.2, 1.0);
            raw.push_back(w.amplitude);
            waves_.push_back(w);
        }
        const double norm = std::accumulate(raw.begin(), raw.end(), 0.0);
        for (auto& w : waves_) w.amplitude *= total_amplitude / norm;
        (void)width;
        (void)height;
    }

    double operator()(double u, double v) const {
        double s = 0.0;
        for (const auto& w : waves_) s += w.amplitude * std::sin(w.kx * u + w.ky * v + w.phase);
        return s;
    }

private:
    std::vector<Wave> waves_;
};

struct DepthSurface {
    SmoothField field;
    double mid = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    double operator()(double u, double v) const { return std::clamp(mid + field(u, v), lo, hi); }
};

Twist random_twist(std::mt19937_64& rng, const TwistBounds& b) {
    Twist t;
    t.v = Eigen::Vector3d(uniform(rng, -0.3, 0.3), uniform(rng, -0.1, 0.1), uniform(rng, 0.3, 1.0)) *
          b.v_max;
    for (int i = 0; i < 3; ++i) t.omega[i] = uniform(rng, -b.omega_max, b.omega_max);
    return t;
}

Eigen::Vector2d flow_px(const StereoRig& rig, const Twist& t, double u, double v, double depth) {
    const NormalizedPoint p = normalize_pixel(rig.intrinsics, u, v);
    return rig.intrinsics.f * predict_flow_point(t, p, depth);
}

bool overlaps(const ObjectRegion& a, const ObjectRegion& b) {
    return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

// Smallest background/object flow difference over the rectangle, in pixels.
double min_separation(const SyntheticScene& s, const ObjectRegion& r) {
    double best = std::numeric_limits<double>::infinity();
    for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
            const double depth = disparity_to_depth(s.rig, s.disparity_gt.d(x, y));
            const Eigen::Vector2d bg = flow_px(s.rig, s.twist_gt, x, y, depth);
            const Eigen::Vector2d obj = flow_px(s.rig, r.twist, x, y, depth);
            best = std::min(best, (obj - bg).norm());
        }
    }
    return best;
}

void place_objects(const SceneConfig& cfg, SyntheticScene& s) {
    if (cfg.object_count == 0) return;
    auto rng = stream(cfg.seed, kObjects);
    const double area = cfg.object_fraction * cfg.width * cfg.height / cfg.object_count;
    for (int k = 0; k < cfg.object_count; ++k) {
        ObjectRegion r;
        for (int attempt = 0; attempt < 200; ++attempt) {
            const double aspect = uniform(rng, 0.5, 2.0);
            const int w = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), 1,
                                     cfg.width);
            const int h = std::clamp(static_cast<int>(std::lround(area / w)), 1, cfg.height);
            r.x0 = static_cast<int>(uniform(rng, 0.0, cfg.width - w + 1.0));
            r.y0 = static_cast<int>(uniform(rng, 0.0, cfg.height - h + 1.0));
            r.x0 = std::min(r.x0, cfg.width - w);
            r.y0 = std::min(r.y0, cfg.height - h);
            r.x1 = r.x0 + w;
            r.y1 = r.y0 + h;
            const bool clash = std::any_of(s.objects.begin(), s.objects.end(),
                                           [&](const ObjectRegion& o) { return overlaps(o, r); });
            if (!clash) break;
        }
        // Resample the offset until the object flow is unambiguous everywhere,
        // widening the bounds after every failed round.
        double scale = 1.0;
        for (int attempt = 0;; ++attempt) {
            Twist offset;
            for (int i = 0; i < 3; ++i) {
                offset.v[i] = uniform(rng, -1.0, 1.0) * cfg.object_offset_max.v[i] * scale;
                offset.omega[i] = uniform(rng, -1.0, 1.0) * cfg.object_offset_max.omega[i] * scale;
            }
            r.twist = Twist{s.twist_gt.v + offset.v, s.twist_gt.omega + offset.omega};
            if (min_separation(s, r) >= cfg.object_min_separation_px) break;
            if (attempt % 50 == 49) scale *= 1.5;
            if (attempt > 2000) throw Error(ErrorCode::kEstimationFailed,
                                            "could not separate object flow from background");
        }
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                s.object_mask(x, y) = 1;
                const double depth = disparity_to_depth(s.rig, s.disparity_gt.d(x, y));
                const Eigen::Vector2d f = flow_px(s.rig, r.twist, x, y, depth);
                s.flow_gt.u(x, y) = f.x();
                s.flow_gt.v(x, y) = f.y();
            }
        }
        s.objects.push_back(r);
    }
}

const Twist& twist_at(const SyntheticScene& s, double u, double v) {
    for (const auto& o : s.objects)
        if (u >= o.x0 - 0.5 && u < o.x1 - 0.5 && v >= o.y0 - 0.5 && v < o.y1 - 0.5) return o.twist;
    return s.twist_gt;
}

// Solves x + g(x) = target by fixed-point iteration starting at the target.
template <typename Displacement>
Eigen::Vector2d invert_map(const Eigen::Vector2d& target, Displacement&& g) {
    Eigen::Vector2d x = target;
    for (int i = 0; i < 40; ++i) {
        const Eigen::Vector2d next = target - g(x);
        if ((next - x).norm() < 1e-12) return next;
        x = next;
    }
    return x;
}

void render_images(const SceneConfig& cfg, const DepthSurface& depth, SyntheticScene& s) {
    auto rng = stream(cfg.seed, kTexture);
    const SmoothField base(rng, cfg.width, cfg.height, 6, 10.0, 40.0, 0.3);
    const SmoothField detail(rng, cfg.width, cfg.height, 4, 5.0, 9.0, 0.12);
    const auto texture = [&](const Eigen::Vector2d& p) {
        return std::clamp(0.5 + base(p.x(), p.y()) + detail(p.x(), p.y()), 0.0, 1.0);
    };
    const StereoRig& rig = s.rig;
    const auto temporal = [&](const Eigen::Vector2d& p) -> Eigen::Vector2d {
        return flow_px(rig, twist_at(s, p.x(), p.y()), p.x(), p.y(), depth(p.x(), p.y()));
    };
    const auto stereo = [&](const Eigen::Vector2d& p) -> Eigen::Vector2d {
        return {-depth_to_disparity(rig, depth(p.x(), p.y())), 0.0};
    };
    // Second stereo pair: the point moved by the rigid motion, seen at its new depth.
    const auto stereo_after = [&](const Eigen::Vector2d& p) -> Eigen::Vector2d {
        const Twist& t = twist_at(s, p.x(), p.y());
        const double z = depth(p.x(), p.y());
        const NormalizedPoint n = normalize_pixel(rig.intrinsics, p.x(), p.y());
        const Eigen::Vector3d point(n.x * z, n.y * z, z);
        const double z1 = std::max(point.z() - t.v.z() - t.omega.cross(point).z(), 1e-3);
        return temporal(p) - Eigen::Vector2d(depth_to_disparity(rig, z1), 0.0);
    };

    SceneImages img{ScalarImage(cfg.width, cfg.height), ScalarImage(cfg.width, cfg.height),
                    ScalarImage(cfg.width, cfg.height), ScalarImage(cfg.width, cfg.height)};
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            const Eigen::Vector2d q(x, y);
            img.left0(x, y) = texture(q);
            img.left1(x, y) = texture(invert_map(q, temporal));
            img.right0(x, y) = texture(invert_map(q, stereo));
            img.right1(x, y) = texture(invert_map(q, stereo_after));
        }
    }
    s.images = std::move(img);
}

}  // namespace

SceneConfig SceneConfig::with_default_rig(int width, int height) {
    SceneConfig cfg;
    cfg.width = width;
    cfg.height = height;
    cfg.rig.intrinsics = CameraIntrinsics{0.58 * width, 0.5 * width, 0.5 * height, width, height};
    cfg.rig.baseline = 0.54;
    return cfg;
}

void SceneConfig::validate() const {
    if (width <= 0 || height <= 0) throw_invalid("scene dimensions must be positive");
    rig.validate();
    if (rig.intrinsics.width != width || rig.intrinsics.height != height)
        throw_invalid("rig dimensions do not match the scene");
    if (!(depth_min > 0.0 && depth_min < depth_max)) throw_invalid("need 0 < depth_min < depth_max");
    if (twist && !twist->is_finite()) throw_invalid("scene twist must be finite");
    if (object_count < 0) throw_invalid("object count must be non-negative");
    if (object_count > 0 && !(object_fraction > 0.0 && object_fraction < 1.0))
        throw_invalid("object fraction must lie in (0, 1)");
    if (!(noise_sigma_flow >= 0.0) || !(noise_sigma_disp >= 0.0))
        throw_invalid("noise sigmas must be non-negative");
    if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0))
        throw_invalid("outlier fraction must lie in [0, 1)");
    if (!(object_min_separation_px >= 0.0)) throw_invalid("object separation must be non-negative");
}

Mask SyntheticScene::clean_mask() const {
    Mask m(object_mask.width(), object_mask.height(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = !object_mask[i] && !outlier_mask[i];
    return m;
}

SyntheticScene generate(const SceneConfig& cfg) {
    cfg.validate();
    SyntheticScene s;
    s.rig = cfg.rig;

    auto twist_rng = stream(cfg.seed, kTwist);
    s.twist_gt = cfg.twist ? *cfg.twist : random_twist(twist_rng, cfg.random_twist);

    auto depth_rng = stream(cfg.seed, kDepth);
    const double span = std::max(cfg.width, cfg.height);
    DepthSurface depth{SmoothField(depth_rng, cfg.width, cfg.height, 8, 0.6 * span, 4.0 * span,
                                   0.6 * (cfg.depth_max - cfg.depth_min)),
                       0.5 * (cfg.depth_min + cfg.depth_max), cfg.depth_min, cfg.depth_max};

    s.disparity_gt = DisparityField(cfg.width, cfg.height);
    for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x)
            s.disparity_gt.d(x, y) = depth_to_disparity(s.rig, depth(x, y));
    s.flow_gt = predict_flow_field(s.rig, s.twist_gt, s.disparity_gt);
    s.object_mask = Mask(cfg.width, cfg.height, 0);
    s.outlier_mask = Mask(cfg.width, cfg.height, 0);
    place_objects(cfg, s);

    s.flow = s.flow_gt;
    s.disparity = s.disparity_gt;
    if (cfg.with_images) render_images(cfg, depth, s);
    return perturb(std::move(s), cfg.noise_sigma_flow, cfg.noise_sigma_disp, cfg.outlier_fraction,
                   stream(cfg.seed, kNoise)());
}

SyntheticScene perturb(SyntheticScene scene, double noise_sigma_flow, double noise_sigma_disp,
                       double outlier_fraction, std::uint64_t seed) {
    if (!(noise_sigma_flow >= 0.0) || !(noise_sigma_disp >= 0.0))
        throw_invalid("noise sigmas must be non-negative");
    if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0))
        throw_invalid("outlier fraction must lie in [0, 1)");
    std::mt19937_64 rng(seed);
    const std::size_t n = scene.flow.u.size();

    if (noise_sigma_flow > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_sigma_flow);
        for (std::size_t i = 0; i < n; ++i) {
            scene.flow.u[i] += noise(rng);
            scene.flow.v[i] += noise(rng);
        }
    }
    if (noise_sigma_disp > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_sigma_disp);
        for (std::size_t i = 0; i < n; ++i) {
            scene.disparity.d[i] += noise(rng);
            if (!(scene.disparity.d[i] > 0.0)) scene.disparity.valid[i] = 0;
        }
    }
    const auto replaced = static_cast<std::size_t>(std::floor(outlier_fraction * static_cast<double>(n)));
    if (replaced > 0) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Partial Fisher-Yates: the first `replaced` entries are a uniform subset.
        for (std::size_t k = 0; k < replaced; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, n - 1);
            std::swap(order[k], order[pick(rng)]);
            const std::size_t i = order[k];
            const double angle = uniform(rng, 0.0, kTwoPi);
            const double magnitude = uniform(rng, 0.0, kMaxOutlierFlow);
            scene.flow.u[i] = magnitude * std::cos(angle);
            scene.flow.v[i] = magnitude * std::sin(angle);
            scene.outlier_mask[i] = 1;
        }
    }
    return scene;
}

}  // namespace egoflow
