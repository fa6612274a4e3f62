#include <benchmark/benchmark.h>

#include "egoflow/losses.hpp"
#include "egoflow/motion_field.hpp"
#include "egoflow/ransac.hpp"
#include "egoflow/synthetic.hpp"

namespace {

using namespace egoflow;

const SyntheticScene& scene() {
    static const SyntheticScene s = [] {
        SceneConfig cfg = SceneConfig::with_default_rig(448, 128);
        cfg.seed = 7;
        cfg.object_count = 2;
        cfg.noise_sigma_flow = 0.1;
        cfg.with_images = true;
        return generate(cfg);
    }();
    return s;
}

void BM_EstimatePoseRansac(benchmark::State& state) {
    const SyntheticScene& s = scene();
    RansacConfig rc;
    rc.iterations = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_pose_ransac(s.rig, s.flow, s.disparity, rc));
    state.SetItemsProcessed(state.iterations() * s.flow.u.size());
}
BENCHMARK(BM_EstimatePoseRansac)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_PredictFlowField(benchmark::State& state) {
    const SyntheticScene& s = scene();
    for (auto _ : state) benchmark::DoNotOptimize(predict_flow_field(s.rig, s.twist_gt, s.disparity_gt));
    state.SetItemsProcessed(state.iterations() * s.flow.u.size());
}
BENCHMARK(BM_PredictFlowField)->Unit(benchmark::kMicrosecond);

void BM_AppearanceLoss(benchmark::State& state) {
    const SyntheticScene& s = scene();
    const WarpField w = WarpField::from_flow(s.flow_gt);
    LossConfig cfg;
    cfg.ssim_window = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(appearance_loss(s.images->left0, s.images->left1, w, cfg));
    state.SetItemsProcessed(state.iterations() * s.flow.u.size());
}
BENCHMARK(BM_AppearanceLoss)->Arg(3)->Arg(7)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
