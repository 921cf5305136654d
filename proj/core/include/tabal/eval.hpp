#pragma once

#include <map>
#include <string>
#include <vector>

#include "tabal/geometry.hpp"
#include "tabal/scoring.hpp"

namespace tabal {

// One prediction's fate after greedy matching against ground truth.
struct DetectionMatch {
    int prediction_index = -1;  // index into the original prediction list
    double confidence = 0.0;
    bool is_true_positive = false;
    int gt_index = -1;  // matched ground truth, -1 for false positives
};

// Matching outcome for a single image at one IoU threshold.
struct MatchList {
    std::vector<DetectionMatch> matches;  // ordered by descending confidence
    int num_ground_truths = 0;

    int true_positives() const;
};

struct ImageMatches {
    std::string image_id;
    MatchList matches;
};

struct MatchCounts {
    int64_t matched = 0;          // one-to-one matched pairs
    int64_t false_positives = 0;  // unmatched predictions
    int64_t false_negatives = 0;  // unmatched ground truths
};

struct EvalReport {
    // AP per IoU matching threshold, ascending threshold order.
    std::vector<std::pair<double, double>> ap_per_threshold;
    double map_50 = 0.0;    // AP at IoU 0.5
    double map_coco = 0.0;  // mean AP over the configured thresholds
    MatchCounts counts;     // tallied at IoU 0.5
};

struct EvalConfig {
    std::vector<double> thresholds;  // defaults to coco_thresholds()
    EvalConfig();
};

// The 10 canonical thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

// Greedy one-to-one matching: predictions in descending confidence order
// (ties by original index), each matched to the unmatched ground truth with
// the highest IoU provided it reaches iou_thresh. Ties on IoU go to the
// lowest ground-truth index.
MatchList match_detections(const std::vector<Detection>& preds,
                           const std::vector<BoundingBox>& gts, double iou_thresh);

// 101-point interpolated AP with a monotone precision envelope, accumulated
// over all images in (confidence desc, image_id asc, prediction index asc)
// order. With zero ground truths: 0 if any prediction exists, else 1.
double average_precision(const std::vector<ImageMatches>& images);

// Full report over a prediction set. gt_store maps image_id to its ground
// truth boxes; every predicted image must have an entry (possibly empty), and
// store images without predictions count as all-missed. Throws io_error
// naming the id when a prediction has no ground-truth entry.
EvalReport evaluate(const std::vector<PredictionRecord>& preds,
                    const std::map<std::string, std::vector<BoundingBox>>& gt_store,
                    const EvalConfig& config);

}  // namespace tabal
