#include "egoflow/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "egoflow/error.hpp"
#include "egoflow/evaluation.hpp"
#include "egoflow/io.hpp"
#include "egoflow/losses.hpp"
#include "egoflow/motion_field.hpp"
#include "egoflow/ransac.hpp"
#include "egoflow/synthetic.hpp"

namespace egoflow::cli {

namespace fs = std::filesystem;

namespace {

/// Ordered key=value report.
class Report {
public:
    void add(std::string key, double value) { lines_.emplace_back(std::move(key), io::format_report(value)); }
    void add(std::string key, std::size_t value) { lines_.emplace_back(std::move(key), std::to_string(value)); }
    void add(std::string key, std::string value) { lines_.emplace_back(std::move(key), std::move(value)); }

    void add_twist(const std::string& prefix, const Twist& t) {
        static constexpr const char* kNames[6] = {"v_x", "v_y", "v_z", "omega_x", "omega_y", "omega_z"};
        const auto x = t.stacked();
        for (int i = 0; i < 6; ++i) add(prefix + kNames[i], x[i]);
    }

    std::string str() const {
        std::string s;
        for (const auto& [k, v] : lines_) s += k + "=" + v + "\n";
        return s;
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

void emit(const Report& report, std::ostream& out, const std::string& report_path) {
    const std::string text = report.str();
    out << text;
    if (!report_path.empty()) io::write_file_atomic(report_path, text);
}

Twist twist_from(const std::vector<double>& values) {
    Eigen::Matrix<double, 6, 1> x;
    for (int i = 0; i < 6; ++i) x[i] = values.at(static_cast<std::size_t>(i));
    Twist t = Twist::from_stacked(x);
    if (!t.is_finite()) throw_invalid("twist must be finite");
    return t;
}

std::string twist_string(const Twist& t) {
    std::string s;
    const auto x = t.stacked();
    for (int i = 0; i < 6; ++i) s += (i ? " " : "") + io::format_exact(x[i]);
    return s;
}

struct RansacOptions {
    int iterations = 100;
    double threshold = 1.0;
    int min_inliers = 6;
    std::uint64_t seed = 0;
    bool no_refit = false;
    std::string norm = "l2";

    void attach(CLI::App* app) {
        app->add_option("--ransac-iters", iterations, "RANSAC hypotheses")->capture_default_str()
            ->check(CLI::PositiveNumber);
        app->add_option("--inlier-threshold", threshold, "Inlier threshold in pixels")
            ->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--min-inliers", min_inliers, "Minimum inlier count")->capture_default_str()
            ->check(CLI::Range(3, 1 << 30));
        app->add_option("--seed", seed, "Sampling seed")->capture_default_str();
        app->add_flag("--no-refit", no_refit, "Skip the least-squares refit on the inlier set");
        app->add_option("--norm", norm, "Residual norm")->capture_default_str()
            ->check(CLI::IsMember({"l2", "linf"}));
    }

    RansacConfig config() const {
        RansacConfig cfg;
        cfg.iterations = iterations;
        cfg.threshold_px = threshold;
        cfg.min_inliers = min_inliers;
        cfg.seed = seed;
        cfg.refit = !no_refit;
        cfg.norm = norm == "linf" ? ResidualNorm::kMaxAbs : ResidualNorm::kEuclidean;
        return cfg;
    }
};

void report_estimate(Report& r, const PoseEstimate& est, std::size_t valid) {
    r.add_twist("", est.twist);
    r.add("inlier_count", est.inlier_count);
    r.add("valid_pixels", valid);
    r.add("inlier_fraction", est.inlier_fraction);
    r.add("mean_residual_px", est.mean_residual_px);
}

std::size_t jointly_valid(const FlowField& flow, const DisparityField& disp) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < flow.valid.size(); ++i)
        n += flow.valid[i] && disp.valid[i] && disp.d[i] > 0.0;
    return n;
}

// --- estimate -------------------------------------------------------------

struct EstimateCmd {
    std::string flow, disparity, calib, mask_out, report;
    RansacOptions ransac;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("estimate", "Robust twist from flow + disparity");
        app->add_option("--flow", flow, "Flow field (.png or text)")->required()->check(CLI::ExistingFile);
        app->add_option("--disparity", disparity, "Disparity field")->required()->check(CLI::ExistingFile);
        app->add_option("--calib", calib, "Calibration file")->required()->check(CLI::ExistingFile);
        app->add_option("--mask-out", mask_out, "Write the inlier mask (8-bit PNG)");
        app->add_option("--report", report, "Also write the report to this file");
        ransac.attach(app);
        app->callback([this] { pending = true; });
    }

    int run(std::ostream& out) const {
        const StereoRig rig = io::read_calibration(calib);
        const FlowField f = io::read_flow(flow);
        const DisparityField d = io::read_disparity(disparity);
        const PoseEstimate est = estimate_pose_ransac(rig, f, d, ransac.config());
        if (!mask_out.empty()) io::write_mask(mask_out, est.mask.inlier);
        Report r;
        report_estimate(r, est, jointly_valid(f, d));
        emit(r, out, report);
        return kExitOk;
    }

    bool pending = false;
};

// --- predict-flow / disparity-from-flow ------------------------------------

struct PredictFlowCmd {
    std::string disparity, calib, out_path;
    std::vector<double> twist;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("predict-flow", "Rigid flow from disparity and a twist");
        app->add_option("--disparity", disparity, "Disparity field")->required()->check(CLI::ExistingFile);
        app->add_option("--calib", calib, "Calibration file")->required()->check(CLI::ExistingFile);
        app->add_option("--twist", twist, "vx vy vz wx wy wz")->required()->expected(6)
            ->allow_extra_args(false);
        app->add_option("--out", out_path, "Output flow field")->required();
        app->callback([this] { pending = true; });
    }

    int run(std::ostream& out) const {
        const StereoRig rig = io::read_calibration(calib);
        const DisparityField d = io::read_disparity(disparity);
        const FlowField f = predict_flow_field(rig, twist_from(twist), d);
        io::write_flow(out_path, f);
        Report r;
        r.add("valid_pixels", popcount(f.valid));
        r.add("output", out_path);
        emit(r, out, "");
        return kExitOk;
    }

    bool pending = false;
};

struct DisparityFromFlowCmd {
    std::string flow, calib, out_path;
    std::vector<double> twist;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("disparity-from-flow", "Disparity from flow and a twist");
        app->add_option("--flow", flow, "Flow field")->required()->check(CLI::ExistingFile);
        app->add_option("--calib", calib, "Calibration file")->required()->check(CLI::ExistingFile);
        app->add_option("--twist", twist, "vx vy vz wx wy wz")->required()->expected(6)
            ->allow_extra_args(false);
        app->add_option("--out", out_path, "Output disparity field")->required();
        app->callback([this] { pending = true; });
    }

    int run(std::ostream& out) const {
        const StereoRig rig = io::read_calibration(calib);
        const FlowField f = io::read_flow(flow);
        const DisparityField d = disparity_from_flow(rig, twist_from(twist), f);
        io::write_disparity(out_path, d);
        Report r;
        r.add("valid_pixels", popcount(d.valid));
        r.add("output", out_path);
        emit(r, out, "");
        return kExitOk;
    }

    bool pending = false;
};

// --- losses ----------------------------------------------------------------

struct LossesCmd {
    std::string left0, left1, right0, right1;
    std::string flow, flow_bwd, disparity, disparity_right;
    std::string calib, inliers, maps_dir, resize;
    std::vector<double> twist;
    LossConfig cfg;
    bool ssim_literal = false;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("losses", "Unsupervised loss components");
        app->add_option("--left0", left0, "Left image at t0")->required()->check(CLI::ExistingFile);
        app->add_option("--left1", left1, "Left image at t1")->check(CLI::ExistingFile);
        app->add_option("--right0", right0, "Right image at t0")->check(CLI::ExistingFile);
        app->add_option("--right1", right1, "Right image at t1 (unused by the reported terms)")
            ->check(CLI::ExistingFile);
        app->add_option("--flow", flow, "Flow left0 -> left1")->check(CLI::ExistingFile);
        app->add_option("--flow-bwd", flow_bwd, "Flow left1 -> left0")->check(CLI::ExistingFile);
        app->add_option("--disparity", disparity, "Left disparity at t0")->check(CLI::ExistingFile);
        app->add_option("--disparity-right", disparity_right, "Right disparity at t0")
            ->check(CLI::ExistingFile);
        app->add_option("--calib", calib, "Calibration (enables refinement losses)")
            ->check(CLI::ExistingFile);
        app->add_option("--twist", twist, "vx vy vz wx wy wz for refinement losses")->expected(6)
            ->allow_extra_args(false);
        app->add_option("--inliers", inliers, "Inlier mask for refinement losses")
            ->check(CLI::ExistingFile);
        app->add_option("--maps-dir", maps_dir, "Write per-pixel maps here");
        app->add_option("--resize", resize, "Resize images to HEIGHTxWIDTH, e.g. 128x448");
        app->add_option("--epsilon", cfg.epsilon, "Charbonnier epsilon")->capture_default_str();
        app->add_option("--alpha", cfg.alpha, "Photometric weight in the appearance loss")
            ->capture_default_str();
        app->add_option("--lambda1", cfg.lambda1, "Consistency weight")->capture_default_str();
        app->add_option("--lambda2", cfg.lambda2, "Smoothness weight")->capture_default_str();
        app->add_option("--ssim-window", cfg.ssim_window, "SSIM window size")->capture_default_str();
        app->add_flag("--ssim-literal", ssim_literal, "Use SSIM itself instead of (1 - SSIM) / 2");
        app->callback([this] { pending = true; });
    }

    ScalarImage load(const std::string& path) const {
        ScalarImage img = io::read_image(path);
        if (resize.empty()) return img;
        const auto x = resize.find('x');
        if (x == std::string::npos) throw_invalid("--resize expects HEIGHTxWIDTH");
        const int h = static_cast<int>(io::parse_double(resize.substr(0, x)));
        const int w = static_cast<int>(io::parse_double(resize.substr(x + 1)));
        return io::resize_bilinear(img, w, h);
    }

    void write_map(const std::string& name, const LossMap& map) const {
        if (maps_dir.empty()) return;
        fs::create_directories(maps_dir);
        io::write_file_atomic(fs::path(maps_dir) / (name + ".txt"), io::format_grid_text(map, "map"));
        const double peak = *std::max_element(map.pixels().begin(), map.pixels().end());
        ScalarImage scaled = map;
        if (peak > 0.0)
            for (auto& p : scaled.pixels()) p /= peak;
        io::write_image(fs::path(maps_dir) / (name + ".png"), scaled);
    }

    void pair_terms(Report& r, const std::string& prefix, const ScalarImage& ref,
                    const ScalarImage& target, const WarpField& fwd, const WarpField* bwd) const {
        const Mask occ = occlusion_mask(fwd);
        const LossMap photo = photometric_loss(ref, target, fwd, cfg);
        const LossMap app = appearance_loss(ref, target, fwd, cfg);
        const LossMap smooth = smoothness_loss(fwd, ref, cfg);
        r.add(prefix + ".photometric", masked_sum(photo, &occ));
        r.add(prefix + ".appearance", masked_sum(app, &occ));
        write_map(prefix + "_photometric", photo);
        write_map(prefix + "_appearance", app);
        write_map(prefix + "_smoothness", smooth);
        r.add(prefix + ".smoothness", masked_sum(smooth));
        if (bwd != nullptr) {
            const LossMap cons = consistency_loss(fwd, *bwd, cfg);
            r.add(prefix + ".consistency", masked_sum(cons, &occ));
            write_map(prefix + "_consistency", cons);
            r.add(prefix + ".total", total_warp_loss(ref, target, fwd, *bwd, cfg));
        }
        r.add(prefix + ".in_bounds_pixels", popcount(occ));
    }

    int run(std::ostream& out) const {
        LossConfig c = cfg;
        c.ssim_term = ssim_literal ? SsimTerm::kSimilarity : SsimTerm::kDissimilarity;
        const_cast<LossesCmd*>(this)->cfg = c;
        cfg.validate();

        const ScalarImage l0 = load(left0);
        Report r;
        std::optional<FlowField> f, fb;
        std::optional<DisparityField> d, dr;
        if (!flow.empty()) f = io::read_flow(flow);
        if (!flow_bwd.empty()) fb = io::read_flow(flow_bwd);
        if (!disparity.empty()) d = io::read_disparity(disparity);
        if (!disparity_right.empty()) dr = io::read_disparity(disparity_right);

        std::optional<ScalarImage> l1, r0;
        if (!left1.empty()) l1 = load(left1);
        if (!right0.empty()) r0 = load(right0);

        if (f && l1) {
            const WarpField fwd = WarpField::from_flow(*f);
            std::optional<WarpField> bwd;
            if (fb) bwd = WarpField::from_flow(*fb);
            pair_terms(r, "temporal", l0, *l1, fwd, bwd ? &*bwd : nullptr);
        }
        if (d && r0) {
            const WarpField fwd = WarpField::from_disparity(*d, -1.0);
            std::optional<WarpField> bwd;
            if (dr) bwd = WarpField::from_disparity(*dr, +1.0);
            pair_terms(r, "stereo", l0, *r0, fwd, bwd ? &*bwd : nullptr);
        }
        if (!calib.empty() || !twist.empty()) {
            if (calib.empty() || twist.empty() || !f || !d || !l1 || !r0)
                throw CLI::ValidationError(
                    "refinement losses need --calib, --twist, --flow, --disparity, --left1 and --right0");
            const StereoRig rig = io::read_calibration(calib);
            InlierMask mask{Mask(f->width(), f->height(), 1)};
            if (!inliers.empty()) mask.inlier = io::read_mask(inliers);
            const RefinementLosses ref = refinement_losses(rig, twist_from(twist), *f, *d,
                                                           ImagePair{l0, *l1}, ImagePair{l0, *r0},
                                                           mask, cfg);
            r.add("refinement.stereo", ref.stereo);
            r.add("refinement.stereo_pixels", ref.stereo_pixels);
            r.add("refinement.temporal", ref.temporal);
            r.add("refinement.temporal_pixels", ref.temporal_pixels);
        }
        emit(r, out, "");
        return kExitOk;
    }

    bool pending = false;
};

// --- synth -----------------------------------------------------------------

struct SynthCmd {
    std::string out_dir;
    std::string format = "png";
    std::uint64_t seed = 0;
    int width = 64;
    int height = 64;
    double focal = 0.0;
    double baseline = 0.54;
    double depth_min = 5.0;
    double depth_max = 40.0;
    std::vector<double> twist;
    int objects = 0;
    double object_fraction = 0.3;
    double noise_flow = 0.0;
    double noise_disp = 0.0;
    double outlier_fraction = 0.0;
    bool images = false;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("synth", "Generate a synthetic rigid scene");
        app->add_option("--out-dir", out_dir, "Output directory")->required();
        app->add_option("--format", format, "Field format")->capture_default_str()
            ->check(CLI::IsMember({"png", "text"}));
        app->add_option("--seed", seed, "Scene seed")->capture_default_str();
        app->add_option("--width", width, "Image width")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--height", height, "Image height")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--focal", focal, "Focal length in pixels (default 0.58 * width)");
        app->add_option("--baseline", baseline, "Stereo baseline in meters")->capture_default_str();
        app->add_option("--depth-min", depth_min, "Nearest depth in meters")->capture_default_str();
        app->add_option("--depth-max", depth_max, "Farthest depth in meters")->capture_default_str();
        app->add_option("--twist", twist, "vx vy vz wx wy wz (random when omitted)")->expected(6)
            ->allow_extra_args(false);
        app->add_option("--objects", objects, "Independently moving objects")->capture_default_str();
        app->add_option("--object-fraction", object_fraction, "Image area covered by objects")
            ->capture_default_str();
        app->add_option("--noise-flow", noise_flow, "Flow noise sigma in pixels")->capture_default_str();
        app->add_option("--noise-disp", noise_disp, "Disparity noise sigma in pixels")->capture_default_str();
        app->add_option("--outlier-fraction", outlier_fraction, "Gross flow outlier fraction")
            ->capture_default_str();
        app->add_flag("--images", images, "Also render a stereo/temporal image quadruple");
        app->callback([this] { pending = true; });
    }

    int run(std::ostream& out) const {
        SceneConfig cfg = SceneConfig::with_default_rig(width, height);
        if (focal > 0.0) cfg.rig.intrinsics.f = focal;
        cfg.rig.baseline = baseline;
        cfg.depth_min = depth_min;
        cfg.depth_max = depth_max;
        if (!twist.empty()) cfg.twist = twist_from(twist);
        cfg.object_count = objects;
        cfg.object_fraction = object_fraction;
        cfg.noise_sigma_flow = noise_flow;
        cfg.noise_sigma_disp = noise_disp;
        cfg.outlier_fraction = outlier_fraction;
        cfg.with_images = images;
        cfg.seed = seed;
        const SyntheticScene s = generate(cfg);

        const fs::path dir(out_dir);
        fs::create_directories(dir);
        const std::string ext = format == "png" ? ".png" : ".txt";
        io::write_calibration(dir / "calib.txt", s.rig);
        io::write_flow(dir / ("flow" + ext), s.flow);
        io::write_disparity(dir / ("disparity" + ext), s.disparity);
        io::write_flow(dir / ("flow_gt" + ext), s.flow_gt);
        io::write_disparity(dir / ("disparity_gt" + ext), s.disparity_gt);
        io::write_mask(dir / "object_mask.png", s.object_mask);
        io::write_mask(dir / "outlier_mask.png", s.outlier_mask);
        if (s.images) {
            io::write_image(dir / ("left0" + ext), s.images->left0);
            io::write_image(dir / ("right0" + ext), s.images->right0);
            io::write_image(dir / ("left1" + ext), s.images->left1);
            io::write_image(dir / ("right1" + ext), s.images->right1);
        }

        Report meta;
        meta.add("twist_gt", twist_string(s.twist_gt));
        meta.add("seed", std::to_string(seed));
        meta.add("width", std::to_string(width));
        meta.add("height", std::to_string(height));
        meta.add("calibration", io::format_calibration(s.rig).substr(0, io::format_calibration(s.rig).size() - 1));
        meta.add("depth_range", io::format_exact(depth_min) + " " + io::format_exact(depth_max));
        meta.add("objects", std::to_string(objects));
        meta.add("object_fraction", io::format_exact(object_fraction));
        meta.add("object_pixels", popcount(s.object_mask));
        meta.add("noise_flow", io::format_exact(noise_flow));
        meta.add("noise_disp", io::format_exact(noise_disp));
        meta.add("outlier_fraction", io::format_exact(outlier_fraction));
        meta.add("outlier_pixels", popcount(s.outlier_mask));
        meta.add("images", images ? std::string("1") : std::string("0"));
        meta.add("format", format);
        for (std::size_t k = 0; k < s.objects.size(); ++k)
            meta.add("object" + std::to_string(k) + "_twist", twist_string(s.objects[k].twist));
        io::write_file_atomic(dir / "meta.txt", meta.str());

        Report r;
        r.add_twist("twist_gt.", s.twist_gt);
        r.add("object_pixels", popcount(s.object_mask));
        r.add("outlier_pixels", popcount(s.outlier_mask));
        emit(r, out, "");
        return kExitOk;
    }

    bool pending = false;
};

// --- evaluation --------------------------------------------------------------

struct EvalOdometryCmd {
    std::string pred, gt, plot_out;
    bool align = false;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("eval-odometry", "Relative drift against ground-truth poses");
        app->add_option("--pred", pred, "Estimated pose file")->required()->check(CLI::ExistingFile);
        app->add_option("--gt", gt, "Ground-truth pose file")->required()->check(CLI::ExistingFile);
        app->add_flag("--scale-align", align, "Apply a global scale before evaluation");
        app->add_option("--plot-out", plot_out, "Write 'frame x y z' plot data");
        app->callback([this] { pending = true; });
    }

    int run(std::ostream& out) const {
        Trajectory est = io::read_poses(pred);
        const Trajectory truth = io::read_poses(gt);
        Report r;
        if (align) {
            ScaleAlignment sa = scale_align(est, truth);
            r.add("scale", sa.scale);
            est = std::move(sa.aligned);
        }
        const OdometryErrors e = kitti_odometry_errors(est, truth);
        r.add("t_rel", e.t_rel);
        r.add("r_rel", e.r_rel);
        r.add("segments", e.segments);
        for (const auto& seg : e.per_length) {
            const std::string len = std::to_string(static_cast<int>(seg.length));
            r.add("t_rel_" + len, seg.t_rel);
            r.add("r_rel_" + len, seg.r_rel);
            r.add("segments_" + len, seg.segments);
        }
        if (!plot_out.empty()) io::write_file_atomic(plot_out, io::format_trajectory_plot(est));
        emit(r, out, "");
        return kExitOk;
    }

    bool pending = false;
};

struct EvalFlowCmd {
    std::string pred, gt, noc, mask;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("eval-flow", "End-point error and outlier percentage");
        app->add_option("--pred", pred, "Predicted flow")->required()->check(CLI::ExistingFile);
        app->add_option("--gt", gt, "Ground-truth flow")->required()->check(CLI::ExistingFile);
        app->add_option("--noc", noc, "Non-occluded mask")->check(CLI::ExistingFile);
        app->add_option("--mask", mask, "Restrict evaluation to this mask (e.g. inliers)")
            ->check(CLI::ExistingFile);
        app->callback([this] { pending = true; });
    }

    int run(std::ostream& out) const {
        const FlowField p = io::read_flow(pred);
        const FlowField g = io::read_flow(gt);
        std::optional<Mask> noc_mask, extra;
        if (!noc.empty()) noc_mask = io::read_mask(noc);
        if (!mask.empty()) extra = io::read_mask(mask);
        const FlowErrors e = flow_errors(p, g, noc_mask ? &*noc_mask : nullptr, extra ? &*extra : nullptr);
        Report r;
        r.add("epe_noc", e.epe_noc);
        r.add("epe_all", e.epe_all);
        r.add("outlier_pct_noc", e.outlier_pct_noc);
        r.add("outlier_pct_all", e.outlier_pct_all);
        r.add("pixels_noc", e.pixels_noc);
        r.add("pixels_all", e.pixels_all);
        emit(r, out, "");
        return kExitOk;
    }

    bool pending = false;
};

struct EvalDepthCmd {
    std::string pred, gt, calib, mask, input = "disparity";
    double cap = 50.0;
    bool crop = false;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("eval-depth", "Depth metrics with a distance cap");
        app->add_option("--pred", pred, "Predicted disparity or depth")->required()->check(CLI::ExistingFile);
        app->add_option("--gt", gt, "Ground-truth disparity or depth")->required()->check(CLI::ExistingFile);
        app->add_option("--input", input, "Kind of the input files")->capture_default_str()
            ->check(CLI::IsMember({"disparity", "depth"}));
        app->add_option("--calib", calib, "Calibration (required for disparity input)")
            ->check(CLI::ExistingFile);
        app->add_option("--cap", cap, "Maximum ground-truth depth in meters")->capture_default_str();
        app->add_flag("--garg-crop", crop, "Apply the standard Eigen-split crop");
        app->add_option("--mask", mask, "Restrict evaluation to this mask")->check(CLI::ExistingFile);
        app->callback([this] { pending = true; });
    }

    int run(std::ostream& out) const {
        Grid<double> p, g;
        if (input == "depth") {
            p = io::read_depth_text(pred);
            g = io::read_depth_text(gt);
        } else {
            if (calib.empty()) throw CLI::ValidationError("--calib is required for disparity input");
            const StereoRig rig = io::read_calibration(calib);
            p = depth_from_disparity(rig, io::read_disparity(pred));
            g = depth_from_disparity(rig, io::read_disparity(gt));
        }
        std::optional<Mask> m;
        if (!mask.empty()) m = io::read_mask(mask);
        DepthEvalOptions opts;
        opts.cap = cap;
        if (crop) opts.crop = garg_crop(g.width(), g.height());
        opts.mask = m ? &*m : nullptr;
        const DepthErrors e = depth_errors(p, g, opts);
        Report r;
        r.add("abs_rel", e.abs_rel);
        r.add("sq_rel", e.sq_rel);
        r.add("rmse", e.rmse);
        r.add("rmse_log", e.rmse_log);
        r.add("delta1", e.delta1);
        r.add("delta2", e.delta2);
        r.add("delta3", e.delta3);
        r.add("pixels", e.pixels);
        emit(r, out, "");
        return kExitOk;
    }

    bool pending = false;
};

// --- run-sequence ------------------------------------------------------------

struct RunSequenceCmd {
    std::string dir, calib, out_path, twists_out;
    RansacOptions ransac;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand(
            "run-sequence", "Estimate every frame of a directory and integrate the trajectory");
        app->add_option("--dir", dir, "Directory with flow_<id> and disparity_<id> files")
            ->required()->check(CLI::ExistingDirectory);
        app->add_option("--calib", calib, "Calibration file")->required()->check(CLI::ExistingFile);
        app->add_option("--out", out_path, "Output pose file")->required();
        app->add_option("--twists-out", twists_out, "Per-frame twists, one line each");
        ransac.attach(app);
        app->callback([this] { pending = true; });
    }

    int run(std::ostream& out) const {
        const StereoRig rig = io::read_calibration(calib);
        std::map<std::string, fs::path> flows;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && name.rfind("flow_", 0) == 0)
                flows.emplace(name.substr(5), entry.path());
        }
        if (flows.empty())
            throw Error(ErrorCode::kInsufficientData, "no flow_<id> files in " + dir);

        std::vector<Twist> twists;
        std::string twist_lines;
        std::size_t inliers = 0;
        for (const auto& [suffix, flow_path] : flows) {
            const fs::path disp_path = fs::path(dir) / ("disparity_" + suffix);
            if (!fs::exists(disp_path))
                throw Error(ErrorCode::kInvalidInput, "missing " + disp_path.string());
            const PoseEstimate est = estimate_pose_ransac(rig, io::read_flow(flow_path),
                                                          io::read_disparity(disp_path),
                                                          ransac.config());
            twists.push_back(est.twist);
            twist_lines += twist_string(est.twist) + "\n";
            inliers += est.inlier_count;
        }
        io::write_poses(out_path, integrate_trajectory(twists));
        if (!twists_out.empty()) io::write_file_atomic(twists_out, twist_lines);
        Report r;
        r.add("frames", twists.size());
        r.add("poses", twists.size() + 1);
        r.add("total_inliers", inliers);
        r.add("output", out_path);
        emit(r, out, "");
        return kExitOk;
    }

    bool pending = false;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kDegenerate:
        case ErrorCode::kEstimationFailed: return kExitEstimation;
        default: return kExitData;
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"egoflow: robust egomotion from dense flow and disparity"};
    app.name("egoflow");
    app.require_subcommand(1);

    EstimateCmd estimate;
    PredictFlowCmd predict;
    DisparityFromFlowCmd inverse;
    LossesCmd losses;
    SynthCmd synth;
    EvalOdometryCmd eval_odom;
    EvalFlowCmd eval_flow;
    EvalDepthCmd eval_depth;
    RunSequenceCmd sequence;
    estimate.attach(app);
    predict.attach(app);
    inverse.attach(app);
    losses.attach(app);
    synth.attach(app);
    eval_odom.attach(app);
    eval_flow.attach(app);
    eval_depth.attach(app);
    sequence.attach(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "egoflow: usage error: " << e.what() << " (run 'egoflow --help' for usage)\n";
        return kExitUsage;
    }

    try {
        if (estimate.pending) return estimate.run(out);
        if (predict.pending) return predict.run(out);
        if (inverse.pending) return inverse.run(out);
        if (losses.pending) return losses.run(out);
        if (synth.pending) return synth.run(out);
        if (eval_odom.pending) return eval_odom.run(out);
        if (eval_flow.pending) return eval_flow.run(out);
        if (eval_depth.pending) return eval_depth.run(out);
        if (sequence.pending) return sequence.run(out);
    } catch (const CLI::ParseError& e) {
        err << "egoflow: usage error: " << e.what() << " (run 'egoflow --help' for usage)\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "egoflow: " << to_string(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "egoflow: error: " << e.what() << "\n";
        return kExitData;
    }
    err << "egoflow: usage error: no subcommand given (run 'egoflow --help' for usage)\n";
    return kExitUsage;
}

}  // namespace egoflow::cli
