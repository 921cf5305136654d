#include "tabal/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace tabal {

std::optional<double> mean_confidence(const PredictionRecord& rec) {
    if (rec.detections.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& d : rec.detections) sum += d.confidence;
    return sum / static_cast<double>(rec.detections.size());
}

namespace {

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

}  // namespace

double binary_entropy_score(const PredictionRecord& rec) {
    double best = 0.0;
    for (const auto& d : rec.detections) {
        best = std::max(best, binary_entropy(d.confidence));
    }
    return best;
}

double bba_score(const PredictionRecord& rec, double t_iou) {
    const auto& dets = rec.detections;
    const size_t n = dets.size();
    if (n <= 1) return 0.0;
    int ambiguous = 0;
    for (size_t i = 0; i < n; ++i) {
        double max_iou = 0.0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            max_iou = std::max(max_iou, box_iou(dets[i].box, dets[j].box));
        }
        if (max_iou > t_iou) ++ambiguous;
    }
    return static_cast<double>(ambiguous) / static_cast<double>(n);
}

std::optional<double> ma_score(const PredictionRecord& rec) {
    if (!rec.segmentation_mask.has_value()) return std::nullopt;
    std::vector<BoundingBox> boxes;
    boxes.reserve(rec.detections.size());
    for (const auto& d : rec.detections) boxes.push_back(d.box);
    const BinaryMask detection_mask = rasterize_boxes(boxes, rec.image_width, rec.image_height);
    return 1.0 - mask_iou(detection_mask, *rec.segmentation_mask);
}

int table_count(const PredictionRecord& rec, double conf_floor) {
    int n = 0;
    for (const auto& d : rec.detections) {
        if (d.confidence >= conf_floor) ++n;
    }
    return n;
}

std::vector<ImageScore> score_all(const std::vector<PredictionRecord>& records,
                                  const ScoringConfig& config) {
    std::set<std::string> seen;
    std::vector<ImageScore> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        if (!seen.insert(rec.image_id).second) {
            throw std::invalid_argument("score_all: duplicate image_id \"" + rec.image_id + "\"");
        }
        ImageScore s;
        s.image_id = rec.image_id;
        s.mean_confidence = mean_confidence(rec);
        s.entropy = binary_entropy_score(rec);
        s.bba = bba_score(rec, config.t_iou);
        s.ma = ma_score(rec);
        s.table_count = table_count(rec, config.conf_floor);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace tabal
