#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tabal/geometry.hpp"

namespace tabal {

// One detected table: box plus the detector's confidence in [0, 1].
// Confidence semantics follow the upstream detector (class probability
// scaled by localization IoU); it arrives precomputed and is never rederived
// here.
struct Detection {
    BoundingBox box;
    double confidence = 0.0;
};

// Per-image model output.
struct PredictionRecord {
    std::string image_id;
    int image_width = 0;
    int image_height = 0;
    std::vector<Detection> detections;
    std::optional<BinaryMask> segmentation_mask;
};

// Every strategy score for one image. mean_confidence is absent when the
// image has no detections; ma is absent when the record has no segmentation
// mask.
struct ImageScore {
    std::string image_id;
    std::optional<double> mean_confidence;
    double entropy = 0.0;      // nats
    double bba = 0.0;          // [0, 1]
    std::optional<double> ma;  // [0, 1]
    int table_count = 0;
};

struct ScoringConfig {
    // BBA overlap threshold. 0.006 suits word-like corpora, 0.004 latex-like.
    double t_iou = 0.006;
    // Minimum confidence for a detection to count as a table.
    double conf_floor = 0.5;
};

// Arithmetic mean of detection confidences; nullopt when there are none.
std::optional<double> mean_confidence(const PredictionRecord& rec);

// Max over detections of the binary entropy h(p) = -p ln p - (1-p) ln(1-p).
// 0 when there are no detections; p of exactly 0 or 1 contributes 0.
double binary_entropy_score(const PredictionRecord& rec);

// Fraction of detections whose max IoU with any other detection strictly
// exceeds t_iou. 0 when fewer than two detections.
double bba_score(const PredictionRecord& rec, double t_iou);

// 1 - mask_iou(rasterized detection boxes, segmentation mask); nullopt when
// the record has no mask. All detections contribute regardless of
// confidence.
std::optional<double> ma_score(const PredictionRecord& rec);

// Number of detections with confidence >= conf_floor.
int table_count(const PredictionRecord& rec, double conf_floor);

// All five scores for every record, order-preserving. Throws
// std::invalid_argument naming the id if image_ids are not unique.
std::vector<ImageScore> score_all(const std::vector<PredictionRecord>& records,
                                  const ScoringConfig& config);

}  // namespace tabal
