#include "tabal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabal/error.hpp"

namespace tabal {

int MatchList::true_positives() const {
    int n = 0;
    for (const auto& m : matches) {
        if (m.is_true_positive) ++n;
    }
    return n;
}

EvalConfig::EvalConfig() : thresholds(coco_thresholds()) {}

std::vector<double> coco_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
    return t;
}

MatchList match_detections(const std::vector<Detection>& preds,
                           const std::vector<BoundingBox>& gts, double iou_thresh) {
    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return preds[a].confidence > preds[b].confidence;
    });

    MatchList result;
    result.num_ground_truths = static_cast<int>(gts.size());
    std::vector<bool> gt_taken(gts.size(), false);

    for (int idx : order) {
        double best_iou = 0.0;
        int best_gt = -1;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (gt_taken[g]) continue;
            const double iou = box_iou(preds[idx].box, gts[g]);
            if (iou > best_iou) {
                best_iou = iou;
                best_gt = static_cast<int>(g);
            }
        }
        DetectionMatch m;
        m.prediction_index = idx;
        m.confidence = preds[idx].confidence;
        if (best_gt >= 0 && best_iou >= iou_thresh) {
            m.is_true_positive = true;
            m.gt_index = best_gt;
            gt_taken[best_gt] = true;
        }
        result.matches.push_back(m);
    }
    return result;
}

double average_precision(const std::vector<ImageMatches>& images) {
    struct Entry {
        double confidence;
        const std::string* image_id;
        int prediction_index;
        bool tp;
    };
    std::vector<Entry> entries;
    int64_t total_gt = 0;
    for (const auto& img : images) {
        total_gt += img.matches.num_ground_truths;
        for (const auto& m : img.matches.matches) {
            entries.push_back({m.confidence, &img.image_id, m.prediction_index, m.is_true_positive});
        }
    }
    if (total_gt == 0) return entries.empty() ? 1.0 : 0.0;

    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (*a.image_id != *b.image_id) return *a.image_id < *b.image_id;
        return a.prediction_index < b.prediction_index;
    });

    std::vector<double> precision(entries.size());
    std::vector<double> recall(entries.size());
    int64_t tp = 0;
    for (size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].tp) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
    }
    // Monotone envelope: precision at each point becomes the max over the tail.
    for (size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }

    double sum = 0.0;
    for (int level = 0; level <= 100; ++level) {
        const double r = level / 100.0;
        const auto it = std::lower_bound(recall.begin(), recall.end(), r);
        if (it != recall.end()) {
            sum += precision[static_cast<size_t>(it - recall.begin())];
        }
    }
    return sum / 101.0;
}

EvalReport evaluate(const std::vector<PredictionRecord>& preds,
                    const std::map<std::string, std::vector<BoundingBox>>& gt_store,
                    const EvalConfig& config) {
    for (const auto& rec : preds) {
        if (!gt_store.contains(rec.image_id)) {
            throw io_error("evaluate: image \"" + rec.image_id + "\" has no ground-truth entry");
        }
    }

    EvalReport report;
    std::map<std::string, const PredictionRecord*> by_id;
    for (const auto& rec : preds) by_id[rec.image_id] = &rec;
    auto match_all = [&](double thresh) {
        std::vector<ImageMatches> images;
        images.reserve(gt_store.size());
        static const std::vector<Detection> no_detections;
        for (const auto& [id, gts] : gt_store) {
            const auto it = by_id.find(id);
            const auto& dets = it == by_id.end() ? no_detections : it->second->detections;
            images.push_back({id, match_detections(dets, gts, thresh)});
        }
        return images;
    };

    const auto at_50 = match_all(0.5);
    double sum = 0.0;
    for (double thresh : config.thresholds) {
        const bool is_50 = std::abs(thresh - 0.5) < 1e-12;
        const double ap = average_precision(is_50 ? at_50 : match_all(thresh));
        report.ap_per_threshold.emplace_back(thresh, ap);
        sum += ap;
    }
    report.map_coco = config.thresholds.empty() ? 0.0 : sum / config.thresholds.size();
    report.map_50 = average_precision(at_50);

    for (const auto& img : at_50) {
        const int tp = img.matches.true_positives();
        report.counts.matched += tp;
        report.counts.false_positives += static_cast<int64_t>(img.matches.matches.size()) - tp;
        report.counts.false_negatives += img.matches.num_ground_truths - tp;
    }
    return report;
}

}  // namespace tabal
