#include <benchmark/benchmark.h>

#include <vector>

#include "tabal/eval.hpp"
#include "tabal/geometry.hpp"
#include "tabal/io.hpp"
#include "tabal/loop.hpp"
#include "tabal/rng.hpp"
#include "tabal/sampler.hpp"
#include "tabal/scoring.hpp"
#include "tabal/simulator.hpp"

using namespace tabal;

namespace {

BoundingBox random_box(Rng& rng, double extent) {
    const double x0 = rng.uniform(0.0, extent);
    const double x1 = rng.uniform(0.0, extent);
    const double y0 = rng.uniform(0.0, extent);
    const double y1 = rng.uniform(0.0, extent);
    return {std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
}

void BM_BoxIou(benchmark::State& state) {
    Rng rng(1);
    std::vector<BoundingBox> boxes;
    for (int i = 0; i < 256; ++i) boxes.push_back(random_box(rng, 1000.0));
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(box_iou(boxes[i % 256], boxes[(i + 1) % 256]));
        ++i;
    }
}
BENCHMARK(BM_BoxIou);

void BM_MaskIou(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    Rng rng(2);
    BinaryMask a(dim, dim);
    BinaryMask b(dim, dim);
    for (int y = 0; y < dim; ++y) {
        for (int x = 0; x < dim; ++x) {
            if (rng.uniform() < 0.3) a.set(x, y);
            if (rng.uniform() < 0.3) b.set(x, y);
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(mask_iou(a, b));
    }
}
BENCHMARK(BM_MaskIou)->Arg(64)->Arg(256)->Arg(1024);

void BM_RasterizeBoxes(benchmark::State& state) {
    Rng rng(3);
    std::vector<BoundingBox> boxes;
    for (int i = 0; i < 4; ++i) boxes.push_back(random_box(rng, 128.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(rasterize_boxes(boxes, 128, 160));
    }
}
BENCHMARK(BM_RasterizeBoxes);

void BM_BbaScore(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(4);
    PredictionRecord rec;
    rec.image_id = "bench";
    rec.image_width = rec.image_height = 1000;
    for (int i = 0; i < n; ++i) rec.detections.push_back({random_box(rng, 1000.0), rng.uniform()});
    for (auto _ : state) {
        benchmark::DoNotOptimize(bba_score(rec, 0.004));
    }
}
BENCHMARK(BM_BbaScore)->Arg(4)->Arg(16)->Arg(64);

void BM_Evaluate(benchmark::State& state) {
    const auto test = generate_corpus(CorpusProfile::latex_like, 300, 7);
    SimDetectorState det_state;
    det_state.noise_seed = 1;
    det_state.cluster_tables.assign(5, 40.0);
    std::vector<PredictionRecord> preds;
    std::map<std::string, std::vector<BoundingBox>> gt_store;
    for (const auto& rec : test) {
        preds.push_back(sim_infer(det_state, rec, SimConfig{}, false, 3));
        gt_store[rec.image_id] = rec.gt_boxes;
    }
    const EvalConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(preds, gt_store, cfg));
    }
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

void BM_SelectionRun(benchmark::State& state) {
    const auto train = generate_corpus(CorpusProfile::latex_like, 2000, 42);
    const auto test = generate_corpus(CorpusProfile::latex_like, 300, 4242);
    for (auto _ : state) {
        LoopConfig cfg;
        cfg.strategy = Strategy::tc;
        cfg.scoring.t_iou = 0.004;
        cfg.budget = {50, 200, 50, 50};
        cfg.seed = 1;
        SimDetector detector(SimConfig{}, 1);
        detector.add_images(train);
        detector.add_images(test);
        benchmark::DoNotOptimize(run_loop(train, test, detector, cfg));
    }
}
BENCHMARK(BM_SelectionRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
