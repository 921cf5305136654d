#include <doctest.h>

#include "tabal/error.hpp"
#include "tabal/eval.hpp"
#include "tabal/rng.hpp"
#include "test_support.hpp"

using namespace tabal;

namespace {

std::vector<ImageMatches> single_image(const std::vector<Detection>& preds,
                                       const std::vector<BoundingBox>& gts, double thresh) {
    return {{"img", match_detections(preds, gts, thresh)}};
}

// Random evaluation scene with tie-free confidences.
struct Scene {
    std::vector<PredictionRecord> preds;
    std::map<std::string, std::vector<BoundingBox>> gt_store;
    std::vector<support::OracleImage> oracle_images;
};

Scene random_scene(Rng& rng, int n_images) {
    Scene scene;
    for (int i = 0; i < n_images; ++i) {
        const std::string id = "img-" + std::to_string(i);
        PredictionRecord rec;
        rec.image_id = id;
        rec.image_width = rec.image_height = 64;
        const int n_gt = static_cast<int>(rng.bounded(4));
        std::vector<BoundingBox> gts;
        for (int g = 0; g < n_gt; ++g) gts.push_back(support::random_int_box(rng, 16));
        const int n_pred = static_cast<int>(rng.bounded(5));
        for (int p = 0; p < n_pred; ++p) {
            // Predictions near ground truth plus pure noise, distinct confidences.
            BoundingBox box;
            if (!gts.empty() && rng.uniform() < 0.6) {
                box = gts[rng.bounded(gts.size())];
                box.x_max += static_cast<double>(rng.bounded(4));
                box.y_max += static_cast<double>(rng.bounded(4));
            } else {
                box = support::random_int_box(rng, 16);
            }
            rec.detections.push_back({box, rng.uniform_open()});
        }
        scene.gt_store[id] = gts;
        scene.oracle_images.push_back({id, rec.detections, gts});
        scene.preds.push_back(std::move(rec));
    }
    return scene;
}

}  // namespace

TEST_CASE("match_detections fixtures") {
    const BoundingBox gt{0, 0, 10, 10};

    SUBCASE("IoU 0.9 at threshold 0.5 is a true positive") {
        // Box shifted to IoU approximately 0.9.
        const auto m = match_detections({{{0, 0.5, 10, 10}, 0.8}}, {gt}, 0.5);
        CHECK(m.true_positives() == 1);
        CHECK(m.matches[0].gt_index == 0);
        CHECK(m.num_ground_truths == 1);
    }

    SUBCASE("IoU 0.4 at threshold 0.5 is a false positive and a false negative") {
        // 4x10 box inside a 10x10 ground truth: IoU 0.4.
        const auto m = match_detections({{{0, 0, 4, 10}, 0.8}}, {gt}, 0.5);
        CHECK(m.true_positives() == 0);
        CHECK(m.matches.size() == 1);
        CHECK_FALSE(m.matches[0].is_true_positive);
    }

    SUBCASE("two predictions competing for one ground truth") {
        const std::vector<Detection> preds{{{0, 0, 10, 10}, 0.6}, {{0, 0, 10, 9}, 0.9}};
        const auto m = match_detections(preds, {gt}, 0.5);
        REQUIRE(m.matches.size() == 2);
        // Higher confidence goes first and wins the ground truth.
        CHECK(m.matches[0].prediction_index == 1);
        CHECK(m.matches[0].is_true_positive);
        CHECK_FALSE(m.matches[1].is_true_positive);
    }
}

TEST_CASE("greedy matching is one-to-one regardless of prediction order") {
    const std::vector<BoundingBox> gts{{0, 0, 10, 10}, {20, 0, 30, 10}};
    std::vector<Detection> preds{{{0, 0, 10, 10}, 0.9},
                                 {{1, 0, 11, 10}, 0.8},
                                 {{20, 0, 30, 10}, 0.7}};
    const auto m = match_detections(preds, gts, 0.5);
    CHECK(m.true_positives() == 2);

    std::swap(preds[0], preds[1]);
    const auto m2 = match_detections(preds, gts, 0.5);
    CHECK(m2.true_positives() == 2);
}

TEST_CASE("average_precision trivial cases") {
    const BoundingBox gt{0, 0, 10, 10};

    SUBCASE("all ground truths matched in rank order") {
        const std::vector<BoundingBox> gts{{0, 0, 10, 10}, {20, 0, 30, 10}};
        const std::vector<Detection> preds{{{0, 0, 10, 10}, 0.9}, {{20, 0, 30, 10}, 0.8}};
        CHECK(average_precision(single_image(preds, gts, 0.5)) == doctest::Approx(1.0));
    }

    SUBCASE("no true positives") {
        const std::vector<Detection> preds{{{50, 50, 60, 60}, 0.9}};
        CHECK(average_precision(single_image(preds, {gt}, 0.5)) == doctest::Approx(0.0));
    }

    SUBCASE("no ground truths") {
        CHECK(average_precision(single_image({{{0, 0, 1, 1}, 0.5}}, {}, 0.5)) == 0.0);
        CHECK(average_precision(single_image({}, {}, 0.5)) == 1.0);
    }
}

TEST_CASE("the 2-GT/3-prediction fixture matches the threshold-sweep oracle") {
    // TP at 0.9, FP at 0.8, TP at 0.7.
    const std::vector<BoundingBox> gts{{0, 0, 10, 10}, {20, 0, 30, 10}};
    const std::vector<Detection> preds{{{0, 0, 10, 10}, 0.9},
                                       {{50, 50, 60, 60}, 0.8},
                                       {{20, 0, 30, 10}, 0.7}};
    const double oracle = support::ap_sweep_oracle({{"img", preds, gts}}, 0.5);
    const double ap = average_precision(single_image(preds, gts, 0.5));
    CHECK(ap == doctest::Approx(oracle).epsilon(1e-9));
    // 51 recall levels see the envelope at precision 1, the remaining 50 see
    // 2/3: (51 + 50 * 2/3) / 101 = 253/303.
    CHECK(ap == doctest::Approx(253.0 / 303.0).epsilon(1e-12));
}

TEST_CASE("average_precision equals the sweep oracle on random scenes") {
    Rng rng(2718);
    for (int trial = 0; trial < 60; ++trial) {
        const auto scene = random_scene(rng, 1 + static_cast<int>(rng.bounded(5)));
        for (double thresh : {0.3, 0.5, 0.75}) {
            std::vector<ImageMatches> images;
            for (const auto& img : scene.oracle_images) {
                images.push_back({img.image_id, match_detections(img.preds, img.gts, thresh)});
            }
            CHECK(average_precision(images) ==
                  doctest::Approx(support::ap_sweep_oracle(scene.oracle_images, thresh))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("AP is invariant under ranking-preserving confidence rescaling") {
    Rng rng(3141);
    const auto scene = random_scene(rng, 4);
    std::vector<ImageMatches> base;
    for (const auto& img : scene.oracle_images) {
        base.push_back({img.image_id, match_detections(img.preds, img.gts, 0.5)});
    }
    const double expected = average_precision(base);

    std::vector<support::OracleImage> rescaled = scene.oracle_images;
    for (auto& img : rescaled) {
        for (auto& p : img.preds) p.confidence = 0.1 + 0.5 * p.confidence;
    }
    std::vector<ImageMatches> images;
    for (const auto& img : rescaled) {
        images.push_back({img.image_id, match_detections(img.preds, img.gts, 0.5)});
    }
    CHECK(average_precision(images) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("a trailing low-confidence false positive never increases AP") {
    Rng rng(1618);
    for (int trial = 0; trial < 40; ++trial) {
        auto scene = random_scene(rng, 3);
        std::vector<ImageMatches> base;
        for (const auto& img : scene.oracle_images) {
            base.push_back({img.image_id, match_detections(img.preds, img.gts, 0.5)});
        }
        const double before = average_precision(base);

        // Far-off-screen box below every existing confidence.
        scene.oracle_images[0].preds.push_back({{1000, 1000, 1010, 1010}, 1e-6});
        std::vector<ImageMatches> extended;
        for (const auto& img : scene.oracle_images) {
            extended.push_back({img.image_id, match_detections(img.preds, img.gts, 0.5)});
        }
        CHECK(average_precision(extended) <= before + 1e-12);
    }
}

TEST_CASE("duplicating every image leaves AP unchanged") {
    Rng rng(1729);
    const auto scene = random_scene(rng, 4);
    std::vector<ImageMatches> base;
    std::vector<ImageMatches> doubled;
    for (const auto& img : scene.oracle_images) {
        const auto m = match_detections(img.preds, img.gts, 0.5);
        base.push_back({img.image_id, m});
        doubled.push_back({img.image_id + "-a", m});
        doubled.push_back({img.image_id + "-b", m});
    }
    CHECK(average_precision(doubled) == doctest::Approx(average_precision(base)).epsilon(1e-12));
}

TEST_CASE("evaluate fixtures") {
    Rng rng(5050);

    SUBCASE("predictions identical to ground truth give AP 1 everywhere") {
        const auto scene = random_scene(rng, 3);
        std::vector<PredictionRecord> perfect;
        for (const auto& [id, gts] : scene.gt_store) {
            PredictionRecord rec;
            rec.image_id = id;
            rec.image_width = rec.image_height = 64;
            for (const auto& box : gts) rec.detections.push_back({box, 1.0});
            perfect.push_back(std::move(rec));
        }
        const auto report = evaluate(perfect, scene.gt_store, EvalConfig{});
        CHECK(report.map_50 == doctest::Approx(1.0));
        CHECK(report.map_coco == doctest::Approx(1.0));
        CHECK(report.counts.false_positives == 0);
        CHECK(report.counts.false_negatives == 0);
    }

    SUBCASE("empty predictions on nonempty ground truth give AP 0") {
        std::map<std::string, std::vector<BoundingBox>> gt_store{
            {"a", {{0, 0, 10, 10}}},
        };
        const auto report = evaluate({}, gt_store, EvalConfig{});
        CHECK(report.map_50 == 0.0);
        CHECK(report.map_coco == 0.0);
        CHECK(report.counts.false_negatives == 1);
    }

    SUBCASE("prediction without a ground-truth entry is an error naming the id") {
        PredictionRecord rec;
        rec.image_id = "ghost";
        rec.image_width = rec.image_height = 10;
        CHECK_THROWS_WITH_AS(evaluate({rec}, {}, EvalConfig{}),
                             "evaluate: image \"ghost\" has no ground-truth entry", io_error);
    }
}

TEST_CASE("evaluate matches the sweep oracle per threshold on small random fixtures") {
    Rng rng(6060);
    for (int trial = 0; trial < 25; ++trial) {
        const auto scene = random_scene(rng, 1 + static_cast<int>(rng.bounded(5)));
        const auto report = evaluate(scene.preds, scene.gt_store, EvalConfig{});
        for (const auto& [thresh, ap] : report.ap_per_threshold) {
            CHECK(ap == doctest::Approx(support::ap_sweep_oracle(scene.oracle_images, thresh))
                            .epsilon(1e-12));
        }
        CHECK(report.map_coco ==
              doctest::Approx([&] {
                  double s = 0.0;
                  for (const auto& [t, ap] : report.ap_per_threshold) s += ap;
                  return s / report.ap_per_threshold.size();
              }()).epsilon(1e-12));
    }
}

TEST_CASE("map_coco never exceeds map_50 on random fixtures") {
    Rng rng(7070);
    for (int trial = 0; trial < 40; ++trial) {
        const auto scene = random_scene(rng, 4);
        const auto report = evaluate(scene.preds, scene.gt_store, EvalConfig{});
        CHECK(report.map_coco <= report.map_50 + 1e-12);
    }
}
