#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "egoflow/cli.hpp"
#include "egoflow/io.hpp"
#include "egoflow/motion_field.hpp"
#include "egoflow/ransac.hpp"
#include "support.hpp"

namespace egoflow {
namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& p) {
    const io::Bytes bytes = io::read_file(p);
    return std::string(bytes.begin(), bytes.end());
}

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "egoflow");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::map<std::string, std::string> parse_report(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

class Cli : public ::testing::Test {
protected:
    void synth(const std::string& format, const std::string& extra = "") {
        std::vector<std::string> args{"synth", "--out-dir", dir.path().string(), "--seed", "5",
                                      "--width", "64", "--height", "48", "--format", format, "--images"};
        if (!extra.empty()) args.push_back(extra);
        const Result r = invoke(args);
        ASSERT_EQ(r.code, 0) << r.err;
    }
    std::string path(const std::string& name) const { return dir / name; }

    test::TempDir dir{"cli"};
};

TEST_F(Cli, HelpAndUsage) {
    EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
    EXPECT_EQ(invoke({}).code, cli::kExitUsage);
    EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitUsage);
    const Result r = invoke({"estimate", "--flow", "nope.png"});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("egoflow:"), std::string::npos);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(Cli, EstimateTextMatchesLibrary) {
    synth("text");
    const Result r = invoke({"estimate", "--flow", path("flow.txt"), "--disparity", path("disparity.txt"),
                             "--calib", path("calib.txt"), "--mask-out", path("inliers.png"),
                             "--report", path("report.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto kv = parse_report(r.out);
    const PoseEstimate lib = estimate_pose_ransac(io::read_calibration(path("calib.txt")),
                                                  io::read_flow(path("flow.txt")),
                                                  io::read_disparity(path("disparity.txt")), {});
    const double cli_v[6] = {std::stod(kv.at("v_x")), std::stod(kv.at("v_y")), std::stod(kv.at("v_z")),
                             std::stod(kv.at("omega_x")), std::stod(kv.at("omega_y")),
                             std::stod(kv.at("omega_z"))};
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(cli_v[i], lib.twist.stacked()[i], 1e-6);
    EXPECT_EQ(std::stoul(kv.at("inlier_count")), lib.inlier_count);
    EXPECT_EQ(io::read_mask(path("inliers.png")), lib.mask.inlier);
    EXPECT_EQ(slurp(path("report.txt")), r.out);
}

TEST_F(Cli, EstimateOptions) {
    synth("png");
    const Result r = invoke({"estimate", "--flow", path("flow.png"), "--disparity", path("disparity.png"),
                             "--calib", path("calib.txt"), "--norm", "linf", "--no-refit",
                             "--ransac-iters", "10", "--inlier-threshold", "0.5", "--seed", "3"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(invoke({"estimate", "--flow", path("flow.png"), "--disparity", path("disparity.png"),
                      "--calib", path("calib.txt"), "--norm", "l3"})
                  .code,
              cli::kExitUsage);
}

TEST_F(Cli, ExitCodesForDataAndEstimation) {
    synth("png");
    io::write_file_atomic(path("broken.png"), std::string_view("not a png"));
    Result r = invoke({"estimate", "--flow", path("broken.png"), "--disparity", path("disparity.png"),
                       "--calib", path("calib.txt")});
    EXPECT_EQ(r.code, cli::kExitData);

    FlowField noise(64, 48);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-40, 40);
    for (std::size_t i = 0; i < noise.u.size(); ++i) {
        noise.u[i] = u(rng);
        noise.v[i] = u(rng);
    }
    io::write_flow(path("noise.txt"), noise);
    r = invoke({"estimate", "--flow", path("noise.txt"), "--disparity", path("disparity.png"), "--calib",
                path("calib.txt"), "--inlier-threshold", "1e-6"});
    EXPECT_EQ(r.code, cli::kExitEstimation) << r.err;
}

TEST_F(Cli, PredictAndInvert) {
    synth("text");
    const auto meta = parse_report(slurp(path("meta.txt")));
    std::istringstream tw(meta.at("twist_gt"));
    std::vector<std::string> twist_args(6);
    for (auto& t : twist_args) tw >> t;

    std::vector<std::string> args{"predict-flow", "--disparity", path("disparity_gt.txt"), "--calib",
                                  path("calib.txt"), "--out", path("pred.txt"), "--twist"};
    args.insert(args.end(), twist_args.begin(), twist_args.end());
    ASSERT_EQ(invoke(args).code, 0);
    const FlowField pred = io::read_flow(path("pred.txt"));
    const FlowField gt = io::read_flow(path("flow_gt.txt"));
    for (std::size_t i = 0; i < pred.u.size(); ++i) EXPECT_NEAR(pred.u[i], gt.u[i], 1e-9);

    args = {"disparity-from-flow", "--flow", path("pred.txt"), "--calib", path("calib.txt"), "--out",
            path("disp.png"), "--twist"};
    args.insert(args.end(), twist_args.begin(), twist_args.end());
    ASSERT_EQ(invoke(args).code, 0);
    const DisparityField d = io::read_disparity(path("disp.png"));
    const DisparityField dg = io::read_disparity(path("disparity_gt.txt"));
    for (std::size_t i = 0; i < d.d.size(); ++i)
        if (d.valid[i]) EXPECT_NEAR(d.d[i], dg.d[i], 1.0 / 512 + 1e-9);

    EXPECT_EQ(invoke({"predict-flow", "--disparity", path("disparity_gt.txt"), "--calib", path("calib.txt"),
                      "--out", path("x.txt"), "--twist", "1", "2"})
                  .code,
              cli::kExitUsage);
}

TEST_F(Cli, Losses) {
    synth("png");
    const Result r = invoke({"losses", "--left0", path("left0.png"), "--left1", path("left1.png"), "--right0",
                             path("right0.png"), "--flow", path("flow.png"), "--flow-bwd", path("flow.png"),
                             "--disparity", path("disparity.png"), "--maps-dir", path("maps")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto kv = parse_report(r.out);
    for (const char* key : {"temporal.photometric", "temporal.appearance", "temporal.smoothness",
                            "temporal.consistency", "temporal.total", "stereo.photometric"})
        EXPECT_TRUE(kv.count(key)) << key;
    EXPECT_TRUE(std::filesystem::exists(path("maps/temporal_appearance.txt")));
    EXPECT_TRUE(std::filesystem::exists(path("maps/stereo_smoothness.png")));

    const Result refine = invoke({"losses", "--left0", path("left0.png"), "--left1", path("left1.png"),
                                  "--right0", path("right0.png"), "--flow", path("flow.png"), "--disparity",
                                  path("disparity.png"), "--calib", path("calib.txt"), "--twist", "0", "0",
                                  "1", "0", "0", "0", "--resize", "48x64"});
    ASSERT_EQ(refine.code, 0) << refine.err;
    EXPECT_TRUE(parse_report(refine.out).count("refinement.stereo"));

    EXPECT_EQ(invoke({"losses", "--left0", path("left0.png"), "--calib", path("calib.txt")}).code,
              cli::kExitUsage);
}

TEST_F(Cli, EvalCommands) {
    synth("png");
    Result r = invoke({"eval-flow", "--pred", path("flow.png"), "--gt", path("flow_gt.png"), "--mask",
                       path("object_mask.png")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(parse_report(r.out).count("epe_noc"));

    r = invoke({"eval-depth", "--pred", path("disparity.png"), "--gt", path("disparity_gt.png"), "--calib",
                path("calib.txt"), "--garg-crop"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(parse_report(r.out).at("abs_rel"), "0");
    EXPECT_EQ(invoke({"eval-depth", "--pred", path("disparity.png"), "--gt", path("disparity_gt.png")}).code,
              cli::kExitUsage);

    std::vector<Twist> twists(150, Twist{Eigen::Vector3d(0, 0, 1), Eigen::Vector3d::Zero()});
    io::write_poses(path("gt.txt"), integrate_trajectory(twists));
    for (auto& t : twists) t.v *= 1.1;
    io::write_poses(path("est.txt"), integrate_trajectory(twists));
    r = invoke({"eval-odometry", "--pred", path("est.txt"), "--gt", path("gt.txt"), "--plot-out",
                path("plot.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(std::stod(parse_report(r.out).at("t_rel")), 10.0, 1e-3);
    r = invoke({"eval-odometry", "--pred", path("est.txt"), "--gt", path("gt.txt"), "--scale-align"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_LT(std::stod(parse_report(r.out).at("t_rel")), 1e-6);
    EXPECT_NEAR(std::stod(parse_report(r.out).at("scale")), 1 / 1.1, 1e-9);
}

TEST_F(Cli, RunSequence) {
    const std::string seq = path("seq");
    std::filesystem::create_directories(seq);
    SceneConfig cfg = SceneConfig::with_default_rig(48, 32);
    for (int k = 0; k < 3; ++k) {
        cfg.seed = k;
        const SyntheticScene s = generate(cfg);
        io::write_flow(seq + "/flow_00" + std::to_string(k) + ".txt", s.flow);
        io::write_disparity(seq + "/disparity_00" + std::to_string(k) + ".txt", s.disparity);
        io::write_calibration(path("calib.txt"), s.rig);
    }
    const Result r = invoke({"run-sequence", "--dir", seq, "--calib", path("calib.txt"), "--out",
                             path("poses.txt"), "--twists-out", path("twists.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::read_poses(path("poses.txt")).size(), 4u);
    std::filesystem::remove(seq + "/disparity_001.txt");
    EXPECT_EQ(invoke({"run-sequence", "--dir", seq, "--calib", path("calib.txt"), "--out", path("p2.txt")}).code,
              cli::kExitData);
}

}  // namespace
}  // namespace egoflow
