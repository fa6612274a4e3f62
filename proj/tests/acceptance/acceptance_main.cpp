// Acceptance checks on synthetic data. Prints one PASS/FAIL line per criterion
// and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "egoflow/cli.hpp"
#include "egoflow/error.hpp"
#include "egoflow/evaluation.hpp"
#include "egoflow/io.hpp"
#include "egoflow/losses.hpp"
#include "egoflow/motion_field.hpp"
#include "egoflow/ransac.hpp"
#include "egoflow/synthetic.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace egoflow;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string num(double x) { return io::format_report(x); }

// 1 ------------------------------------------------------------------------

Outcome exact_recovery() {
    double worst_err = 0.0, worst_time = 0.0, min_fraction = 1.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SceneConfig cfg = SceneConfig::with_default_rig(64, 64);
        cfg.seed = seed;
        const SyntheticScene s = generate(cfg);
        RansacConfig rc;
        rc.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        const PoseEstimate est = estimate_pose_ransac(s.rig, s.flow, s.disparity, rc);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        worst_err = std::max(worst_err, test::relative_error(est.twist, s.twist_gt));
        worst_time = std::max(worst_time, secs);
        min_fraction = std::min(min_fraction, est.inlier_fraction);
    }
    return {worst_err < 1e-6 && min_fraction == 1.0 && worst_time < 1.0,
            "max rel err " + num(worst_err) + ", min inlier fraction " + num(min_fraction) +
                ", max runtime " + num(worst_time) + " s"};
}

// 2 ------------------------------------------------------------------------

Outcome outlier_robustness() {
    int good = 0;
    double worst_err = 0.0, worst_recall = 1.0, mean_cover = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SceneConfig cfg = SceneConfig::with_default_rig(448, 128);
        cfg.seed = 1000 + seed;
        cfg.object_count = 2;
        cfg.object_fraction = 0.3;
        cfg.noise_sigma_flow = 0.1;
        const SyntheticScene s = generate(cfg);
        RansacConfig rc;
        rc.seed = seed;
        const PoseEstimate est = estimate_pose_ransac(s.rig, s.flow, s.disparity, rc);
        std::size_t objects = 0, excluded = 0;
        for (std::size_t i = 0; i < s.object_mask.size(); ++i) {
            if (!s.object_mask[i]) continue;
            ++objects;
            excluded += !est.mask.inlier[i];
        }
        const double err = test::relative_error(est.twist, s.twist_gt);
        const double recall = objects ? double(excluded) / double(objects) : 1.0;
        mean_cover += double(objects) / double(s.object_mask.size()) / 50.0;
        worst_err = std::max(worst_err, err);
        worst_recall = std::min(worst_recall, recall);
        good += err < 1e-2 && recall >= 0.99;
    }
    return {good >= 49, std::to_string(good) + "/50 seeds pass, max rel err " + num(worst_err) +
                            ", min exclusion recall " + num(worst_recall) + ", mean object coverage " +
                            num(mean_cover)};
}

// 3 ------------------------------------------------------------------------

Outcome round_trip() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0), speed(0.1, 2.0), disp(0.5, 120.0);
    double worst = 0.0;
    std::size_t checked = 0, degenerate = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const StereoRig rig = test::random_rig(rng, 40 + trial % 7, 30 + trial % 5);
        Eigen::Vector3d dir;
        do dir = Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
        while (dir.norm() < 1e-3 || dir.norm() > 1.0);
        Twist t;
        t.v = dir.normalized() * speed(rng);
        t.omega = Eigen::Vector3d(unit(rng), unit(rng), unit(rng)) * 0.05;
        DisparityField d(rig.intrinsics.width, rig.intrinsics.height);
        for (auto& x : d.d.pixels()) x = disp(rng);
        const DisparityField back = disparity_from_flow(rig, t, predict_flow_field(rig, t, d));
        for (std::size_t i = 0; i < d.d.size(); ++i) {
            if (!back.valid[i]) {
                ++degenerate;
                continue;
            }
            worst = std::max(worst, std::abs(back.d[i] - d.d[i]) / d.d[i]);
            ++checked;
        }
    }
    return {worst < 1e-9 && checked > 0, "max rel err " + num(worst) + " over " + std::to_string(checked) +
                                             " pixels, " + std::to_string(degenerate) + " degenerate"};
}

// 4 ------------------------------------------------------------------------

Outcome ls_oracle() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> pos(-0.7, 0.7), depth(2.0, 80.0);
    std::normal_distribution<double> noise(0.0, 2e-3);
    const int sizes[3] = {3, 10, 1000};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Twist t = test::random_twist(rng, 1.0, 0.03);
        std::vector<MotionSample> samples(sizes[trial % 3]);
        for (auto& s : samples) {
            s.point = {pos(rng), pos(rng)};
            s.depth = depth(rng);
            s.flow = predict_flow_point(t, s.point, s.depth) + Eigen::Vector2d(noise(rng), noise(rng));
        }
        const Twist ours = solve_twist_ls(samples);
        const Twist ref = oracle::normal_equations_twist(samples);
        worst = std::max(worst, (ours.stacked() - ref.stacked()).norm() / ref.stacked().norm());
    }
    return {worst < 1e-9, "max rel diff " + num(worst)};
}

// 5 ------------------------------------------------------------------------

Outcome loss_identities() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0), w(-2.5, 2.5);
    const int W = 48, H = 32;
    ScalarImage img(W, H), other(W, H);
    for (auto& p : img.pixels()) p = u(rng);
    for (auto& p : other.pixels()) p = u(rng);
    const WarpField zero(W, H);
    LossConfig cfg;

    bool photo_ok = true;
    const LossMap photo = photometric_loss(img, img, zero, cfg);
    for (double p : photo.pixels()) photo_ok &= p == cfg.epsilon;
    double ssim_dev = 0.0;
    const LossMap ssim = ssim_map(img, img, cfg);
    for (int y = 1; y < H - 1; ++y)
        for (int x = 1; x < W - 1; ++x) ssim_dev = std::max(ssim_dev, std::abs(ssim(x, y) - 1.0));
    LossConfig a1 = cfg;
    a1.alpha = 1.0;
    WarpField fwd(W, H), bwd(W, H);
    for (auto& p : fwd.du.pixels()) p = w(rng);
    for (auto& p : fwd.dv.pixels()) p = w(rng);
    for (auto& p : bwd.du.pixels()) p = w(rng);
    for (auto& p : bwd.dv.pixels()) p = w(rng);
    const bool alpha_ok = appearance_loss(img, other, fwd, a1) == photometric_loss(img, other, fwd, a1) &&
                          appearance_loss(img, img, zero, a1) == photometric_loss(img, img, zero, a1);

    const LossMap app = appearance_loss(img, other, fwd, cfg);
    const LossMap cons = consistency_loss(fwd, bwd, cfg);
    const LossMap smooth = smoothness_loss(fwd, img, cfg);
    const Mask occ = occlusion_mask(fwd);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < app.size(); ++i)
        sum += (occ[i] ? 1.0L : 0.0L) * (app[i] + cfg.lambda1 * cons[i]) + cfg.lambda2 * smooth[i];
    const double total = total_warp_loss(img, other, fwd, bwd, cfg);
    const double total_diff = std::abs(total - double(sum));

    return {photo_ok && ssim_dev <= 1e-12 && alpha_ok && total_diff <= 1e-9,
            std::string("photometric floor ") + (photo_ok ? "exact" : "violated") + ", max |SSIM-1| " +
                num(ssim_dev) + ", alpha=1 " + (alpha_ok ? "bit-equal" : "differs") + ", |total - sum| " +
                num(total_diff)};
}

// 6 ------------------------------------------------------------------------

Outcome refinement_discrimination() {
    int scenes_ok = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SceneConfig cfg = SceneConfig::with_default_rig(96, 64);
        cfg.seed = 600 + seed;
        cfg.with_images = true;
        const SyntheticScene s = generate(cfg);
        const InlierMask all{Mask(96, 64, 1)};
        const LossConfig lc;
        const ImagePair temporal{s.images->left0, s.images->left1};
        const ImagePair stereo{s.images->left0, s.images->right0};
        const auto eval = [&](const Twist& t) {
            return refinement_losses(s.rig, t, s.flow, s.disparity, temporal, stereo, all, lc);
        };
        const RefinementLosses at_gt = eval(s.twist_gt);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.0, 1.0);
        bool ok = true;
        for (int k = 0; k < 20; ++k) {
            Eigen::Vector3d dv(n(rng), n(rng), n(rng));
            Twist off = s.twist_gt;
            off.v += 0.2 * dv.normalized();
            const RefinementLosses r = eval(off);
            const double margin = std::min(r.stereo_mean() - at_gt.stereo_mean(),
                                           r.temporal_mean() - at_gt.temporal_mean());
            worst_margin = std::min(worst_margin, margin);
            ok &= margin > 0.0;
        }
        scenes_ok += ok;
    }
    return {scenes_ok == 20, std::to_string(scenes_ok) + "/20 scenes, smallest per-pixel margin " +
                                 num(worst_margin)};
}

// 7 ------------------------------------------------------------------------

Trajectory straight(int frames) {
    Trajectory t;
    for (int i = 0; i < frames; ++i) {
        SE3Pose p;
        p.translation = Eigen::Vector3d(0, 0, i);
        t.poses.push_back(p);
    }
    return t;
}

Outcome metric_correctness() {
    const Trajectory gt = straight(1001);
    Trajectory scaled = gt;
    for (auto& p : scaled.poses) p.translation *= 1.05;
    const OdometryErrors se = kitti_odometry_errors(scaled, gt);
    bool ok = std::abs(se.t_rel - 5.0) <= 0.01 && std::abs(se.r_rel) <= 1e-9;
    std::string detail = "scaled path t_rel " + num(se.t_rel) + " r_rel " + num(se.r_rel);

    for (double delta : {0.01, 0.1, 0.2}) {
        Trajectory yaw = gt;
        for (std::size_t i = 0; i < yaw.size(); ++i)
            yaw.poses[i].rotation =
                Eigen::AngleAxisd(i * delta * std::numbers::pi / 180.0, Eigen::Vector3d::UnitY()).toRotationMatrix();
        const double r = kitti_odometry_errors(yaw, gt).r_rel;
        ok &= std::abs(r - 100.0 * delta) <= 1e-3 * 100.0 * delta;
        detail += ", yaw " + num(delta) + " deg/frame r_rel " + num(r);
    }

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-15, 15), j(-5, 5), g(0.5, 70), k(0.5, 1.6);
    FlowField fg(60, 40), fp(60, 40);
    Mask noc(60, 40, 1);
    Grid<double> dg(60, 40), dp(60, 40);
    for (std::size_t i = 0; i < fg.u.size(); ++i) {
        fg.u[i] = u(rng);
        fg.v[i] = u(rng);
        fp.u[i] = fg.u[i] + j(rng);
        fp.v[i] = fg.v[i] + j(rng);
        fg.valid[i] = i % 9 != 0;
        noc[i] = i % 4 != 0;
        dg[i] = i % 10 == 0 ? 0.0 : g(rng);
        dp[i] = dg[i] * k(rng);
    }
    const FlowErrors fe = flow_errors(fp, fg, &noc);
    const auto fo_all = oracle::flow_metrics(fp, fg, nullptr), fo_noc = oracle::flow_metrics(fp, fg, &noc);
    const DepthErrors de = depth_errors(dp, dg);
    const DepthErrors dor = oracle::depth_metrics(dp, dg, 50.0, nullptr);
    const double flow_diff = std::max({std::abs(fe.epe_all - fo_all.epe), std::abs(fe.epe_noc - fo_noc.epe),
                                       std::abs(fe.outlier_pct_all - fo_all.outlier_pct),
                                       std::abs(fe.outlier_pct_noc - fo_noc.outlier_pct)});
    const double depth_diff = std::max({std::abs(de.rmse - dor.rmse), std::abs(de.rmse_log - dor.rmse_log),
                                        std::abs(de.abs_rel - dor.abs_rel), std::abs(de.sq_rel - dor.sq_rel),
                                        std::abs(de.delta1 - dor.delta1), std::abs(de.delta2 - dor.delta2),
                                        std::abs(de.delta3 - dor.delta3)});
    ok &= flow_diff <= 1e-12 && depth_diff <= 1e-12 && de.pixels == dor.pixels;
    detail += ", flow oracle diff " + num(flow_diff) + ", depth oracle diff " + num(depth_diff);
    return {ok, detail};
}

// 8 ------------------------------------------------------------------------

Outcome inlier_protocol() {
    // 4x4 fixture: gt flow (10, 0), gt depth 10 m everywhere. Inliers are the
    // diagonal plus (0, 3), where the ground truth is invalid.
    FlowField gt(4, 4), pred(4, 4);
    Grid<double> dgt(4, 4, 10.0), dpred(4, 4, 1000.0);
    Mask inliers(4, 4, 0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            gt.u(x, y) = 10.0;
            pred.u(x, y) = 110.0;
        }
    const double pu[4] = {13.0, 10.0, 16.0, 11.0}, pv[4] = {4.0, 0.0, 8.0, 0.0};
    const double pd[4] = {20.0, 5.0, 10.0, 12.5};
    for (int i = 0; i < 4; ++i) {
        inliers(i, i) = 1;
        pred.u(i, i) = pu[i];
        pred.v(i, i) = pv[i];
        dpred(i, i) = pd[i];
    }
    inliers(0, 3) = 1;
    gt.valid(0, 3) = 0;
    dgt(0, 3) = 0.0;

    const FlowErrors fe = flow_errors(pred, gt, nullptr, &inliers);
    DepthEvalOptions opts;
    opts.mask = &inliers;
    const DepthErrors de = depth_errors(dpred, dgt, opts);

    // EPE 5, 0, 10, 1; outliers are the 5 and the 10.
    const double log_sq = (2 * std::log(2.0) * std::log(2.0) + std::log(1.25) * std::log(1.25)) / 4;
    bool ok = fe.epe_all == 4.0 && fe.epe_noc == 4.0 && fe.outlier_pct_all == 50.0 && fe.pixels_all == 4;
    ok &= de.pixels == 4 && de.abs_rel == 0.4375 && de.sq_rel == 3.28125 && de.rmse == std::sqrt(32.8125);
    ok &= de.delta1 == 0.25 && de.delta2 == 0.5 && de.delta3 == 0.5;
    ok &= std::abs(de.rmse_log - std::sqrt(log_sq)) <= 4 * std::numeric_limits<double>::epsilon();
    return {ok, "epe " + num(fe.epe_all) + ", outliers " + num(fe.outlier_pct_all) + "%, abs_rel " +
                    num(de.abs_rel) + ", sq_rel " + num(de.sq_rel) + ", rmse " + num(de.rmse) + ", rmse_log " +
                    num(de.rmse_log) + ", deltas " + num(de.delta1) + "/" + num(de.delta2) + "/" +
                    num(de.delta3)};
}

// 9 ------------------------------------------------------------------------

Outcome codec_exactness() {
    test::TempDir dir("codec");
    bool ok = true;
    // Every 16-bit code for u (ascending) and v (descending), validity in a checkerboard.
    FlowField f(256, 256);
    for (int i = 0; i < 65536; ++i) {
        f.u[i] = (i - 32768) / 64.0;
        f.v[i] = (65535 - i - 32768) / 64.0;
        f.valid[i] = static_cast<std::uint8_t>(((i & 1) ^ ((i >> 8) & 1)));
    }
    const io::Bytes fb = io::encode_flow_png(f);
    const FlowField fback = io::decode_flow_png(fb);
    ok &= fback == f && io::encode_flow_png(fback) == fb;
    io::write_flow(dir / "f.png", fback);
    ok &= io::read_file(dir / "f.png") == fb;

    // Off-grid values and out-of-range values quantize once, then stay fixed.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> wide(-600.0, 600.0);
    FlowField g(64, 64);
    for (std::size_t i = 0; i < g.u.size(); ++i) {
        g.u[i] = wide(rng);
        g.v[i] = wide(rng);
        g.valid[i] = i % 3 == 0;
    }
    const io::Bytes gb = io::encode_flow_png(g);
    ok &= io::encode_flow_png(io::decode_flow_png(gb)) == gb;

    DisparityField d(256, 256);
    for (int i = 0; i < 65536; ++i) {
        d.d[i] = i / 256.0;
        d.valid[i] = i != 0;
    }
    const io::Bytes db = io::encode_disparity_png(d);
    const DisparityField dback = io::decode_disparity_png(db);
    ok &= dback == d && io::encode_disparity_png(dback) == db;
    io::write_disparity(dir / "d.png", dback);
    ok &= io::read_file(dir / "d.png") == db;

    DisparityField e(64, 64);
    std::uniform_real_distribution<double> dd(-5.0, 300.0);
    for (std::size_t i = 0; i < e.d.size(); ++i) {
        e.d[i] = dd(rng);
        e.valid[i] = e.d[i] > 0.0 && i % 5 != 0;
    }
    const io::Bytes eb = io::encode_disparity_png(e);
    ok &= io::encode_disparity_png(io::decode_disparity_png(eb)) == eb;

    return {ok, std::string("all 65536 flow and disparity codes, off-grid and invalid pixels ") +
                    (ok ? "byte-identical" : "differ")};
}

// 10 -----------------------------------------------------------------------

struct Capture {
    int code = 0;
    std::string out;
    std::map<std::string, io::Bytes> files;
    bool operator==(const Capture&) const = default;
};

int invoke(std::vector<std::string> args, std::string& out) {
    args.insert(args.begin(), "egoflow");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
    out = o.str() + e.str();
    return code;
}

Capture run_captured(const std::vector<std::string>& args, const std::filesystem::path& out_dir) {
    std::filesystem::remove_all(out_dir);
    std::filesystem::create_directories(out_dir);
    Capture c;
    c.code = invoke(args, c.out);
    for (const auto& entry : std::filesystem::recursive_directory_iterator(out_dir))
        if (entry.is_regular_file())
            c.files[std::filesystem::relative(entry.path(), out_dir).string()] = io::read_file(entry.path());
    return c;
}

Outcome cli_determinism() {
    test::TempDir dir("determinism");
    const std::string in = dir / "in";
    const std::string out = dir / "out";
    std::string scratch;
    if (invoke({"synth", "--out-dir", in, "--seed", "17", "--width", "96", "--height", "64", "--objects", "1",
                "--noise-flow", "0.1", "--outlier-fraction", "0.05", "--images"},
               scratch) != 0)
        return {false, "could not create inputs: " + scratch};
    const auto meta = [&] {
        std::map<std::string, std::string> kv;
        const io::Bytes bytes = io::read_file(in + "/meta.txt");
        std::istringstream s(std::string(bytes.begin(), bytes.end()));
        std::string line;
        while (std::getline(s, line)) kv[line.substr(0, line.find('='))] = line.substr(line.find('=') + 1);
        return kv;
    }();
    std::vector<std::string> twist(6);
    std::istringstream ts(meta.at("twist_gt"));
    for (auto& t : twist) ts >> t;

    const std::string seq = dir / "seq";
    std::filesystem::create_directories(seq);
    for (int k = 0; k < 3; ++k) {
        SceneConfig cfg = SceneConfig::with_default_rig(96, 64);
        cfg.seed = 40 + k;
        cfg.noise_sigma_flow = 0.2;
        const SyntheticScene s = generate(cfg);
        io::write_flow(seq + "/flow_" + std::to_string(k) + ".png", s.flow);
        io::write_disparity(seq + "/disparity_" + std::to_string(k) + ".png", s.disparity);
    }
    std::vector<Twist> steps(200, Twist{Eigen::Vector3d(0.05, 0, 1), Eigen::Vector3d(0, 0.002, 0)});
    io::write_poses(dir / "gt_poses.txt", integrate_trajectory(steps));
    for (auto& s : steps) s.omega.y() += 1e-4;
    io::write_poses(dir / "est_poses.txt", integrate_trajectory(steps));

    const std::string calib = in + "/calib.txt";
    auto with_twist = [&](std::vector<std::string> a) {
        a.push_back("--twist");
        a.insert(a.end(), twist.begin(), twist.end());
        return a;
    };
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"synth", {"synth", "--out-dir", out, "--seed", "3", "--objects", "2", "--noise-flow", "0.2",
                   "--noise-disp", "0.05", "--outlier-fraction", "0.1", "--images"}},
        {"estimate", {"estimate", "--flow", in + "/flow.png", "--disparity", in + "/disparity.png", "--calib",
                      calib, "--mask-out", out + "/mask.png", "--report", out + "/report.txt"}},
        {"predict-flow", with_twist({"predict-flow", "--disparity", in + "/disparity.png", "--calib", calib,
                                     "--out", out + "/pred.png"})},
        {"disparity-from-flow", with_twist({"disparity-from-flow", "--flow", in + "/flow.png", "--calib",
                                            calib, "--out", out + "/disp.txt"})},
        {"losses", with_twist({"losses", "--left0", in + "/left0.png", "--left1", in + "/left1.png", "--right0",
                               in + "/right0.png", "--flow", in + "/flow.png", "--flow-bwd", in + "/flow_gt.png",
                               "--disparity", in + "/disparity.png", "--calib", calib, "--maps-dir",
                               out + "/maps"})},
        {"eval-odometry", {"eval-odometry", "--pred", dir / "est_poses.txt", "--gt", dir / "gt_poses.txt",
                           "--scale-align", "--plot-out", out + "/plot.txt"}},
        {"eval-flow", {"eval-flow", "--pred", in + "/flow.png", "--gt", in + "/flow_gt.png", "--mask",
                       in + "/object_mask.png"}},
        {"eval-depth", {"eval-depth", "--pred", in + "/disparity.png", "--gt", in + "/disparity_gt.png",
                        "--calib", calib, "--garg-crop"}},
        {"run-sequence", {"run-sequence", "--dir", seq, "--calib", calib, "--out", out + "/poses.txt",
                          "--twists-out", out + "/twists.txt"}},
    };

    bool ok = true;
    std::string detail;
    for (const auto& [name, args] : commands) {
        std::vector<Capture> runs;
        for (int threads : {1, 8}) {
            test::ThreadsEnv env(threads);
            for (int rep = 0; rep < 2; ++rep) runs.push_back(run_captured(args, out));
        }
        const bool same = std::all_of(runs.begin(), runs.end(), [&](const Capture& c) { return c == runs[0]; });
        const bool success = runs[0].code == 0 && !runs[0].out.empty();
        ok &= same && success;
        if (!same || !success) detail += name + (success ? " differs; " : " failed: " + runs[0].out + "; ");
    }
    return {ok, ok ? std::to_string(commands.size()) + " subcommands byte-identical over 2 runs x threads {1, 8}"
                   : detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"exact recovery", exact_recovery},
        {"outlier robustness", outlier_robustness},
        {"round-trip inversion", round_trip},
        {"least-squares oracle", ls_oracle},
        {"loss floors and identities", loss_identities},
        {"refinement-loss discrimination", refinement_discrimination},
        {"metric correctness", metric_correctness},
        {"inlier-restricted metrics", inlier_protocol},
        {"codec exactness", codec_exactness},
        {"CLI determinism", cli_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
