#include "tabal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tabal/error.hpp"
#include "tabal/geometry.hpp"
#include "tabal/rng.hpp"

namespace tabal {

int cluster_count(CorpusProfile profile) {
    return profile == CorpusProfile::latex_like ? 5 : 12;
}

const std::vector<double>& table_count_pmf(CorpusProfile profile) {
    // P(1 table), P(2 tables), ...
    static const std::vector<double> latex{0.62, 0.22, 0.10, 0.04, 0.02};
    static const std::vector<double> word{0.78, 0.16, 0.04, 0.02};
    return profile == CorpusProfile::latex_like ? latex : word;
}

namespace {

int draw_from_pmf(const std::vector<double>& pmf, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (size_t i = 0; i < pmf.size(); ++i) {
        acc += pmf[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(pmf.size()) - 1;
}

}  // namespace

Dataset generate_corpus(CorpusProfile profile, int n_images, uint64_t seed,
                        const CorpusParams& params) {
    if (n_images <= 0) {
        throw config_error("generate_corpus: n_images must be positive, got " +
                           std::to_string(n_images));
    }
    const bool latex = profile == CorpusProfile::latex_like;
    const uint64_t base = combine_seed(seed, to_string(profile));
    const auto& pmf = table_count_pmf(profile);

    Dataset corpus;
    corpus.reserve(n_images);
    // Seed-derived namespace keeps ids from independently generated corpora
    // (train vs test) distinct.
    const uint32_t ns = static_cast<uint32_t>(base >> 32);
    for (int i = 0; i < n_images; ++i) {
        Rng rng(combine_seed(base, static_cast<uint64_t>(i)));
        DatasetRecord rec;
        char id[40];
        std::snprintf(id, sizeof(id), "%s-%08x-%06d", latex ? "latex" : "word", ns, i);
        rec.image_id = id;
        rec.width = params.min_width + static_cast<int>(rng.bounded(params.max_width - params.min_width + 1));
        rec.height =
            params.min_height + static_cast<int>(rng.bounded(params.max_height - params.min_height + 1));

        Hardness hardness;
        hardness.style_cluster = static_cast<int>(rng.bounded(cluster_count(profile)));
        hardness.overlap_prone = rng.uniform() < params.overlap_prone_fraction;
        const int tables = 1 + draw_from_pmf(pmf, rng);

        // Tables stacked vertically in equal slots with per-table gaps;
        // latex-like pages keep consistent margins, word-like pages wander.
        const double margin = 0.04 * rec.height;
        const double slot = (rec.height - 2.0 * margin) / tables;
        for (int t = 0; t < tables; ++t) {
            const double gap = slot * rng.uniform(0.06, 0.16);
            double y0 = margin + t * slot + gap;
            double y1 = margin + (t + 1) * slot - gap;
            double frac, x0;
            if (latex) {
                frac = rng.uniform(0.60, 0.85);
                x0 = (1.0 - frac) / 2.0 * rec.width + rng.uniform(-0.03, 0.03) * rec.width;
            } else {
                frac = rng.uniform(0.35, 0.90);
                x0 = rng.uniform(0.02, 1.0 - frac - 0.02) * rec.width;
            }
            double x1 = x0 + frac * rec.width;
            BoundingBox box;
            box.x_min = std::max(0.0, std::round(x0));
            box.y_min = std::max(0.0, std::round(y0));
            box.x_max = std::min<double>(rec.width, std::round(x1));
            box.y_max = std::min<double>(rec.height, std::round(y1));
            rec.gt_boxes.push_back(box);
        }
        hardness.table_count = static_cast<int>(rec.gt_boxes.size());
        rec.hardness = hardness;
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

double SimDetectorState::competence(int cluster, double m0) const {
    if (cluster < 0 || static_cast<size_t>(cluster) >= cluster_tables.size()) return 0.0;
    const double m = cluster_tables[cluster];
    if (m <= 0.0) return 0.0;
    return m / (m + m0);
}

SimDetectorState sim_train(SimDetectorState state,
                           const std::vector<const DatasetRecord*>& labeled, bool warm_start) {
    if (!warm_start) {
        std::fill(state.cluster_tables.begin(), state.cluster_tables.end(), 0.0);
    }
    for (const DatasetRecord* rec : labeled) {
        if (!rec->hardness) {
            throw config_error("sim_train: image \"" + rec->image_id +
                               "\" lacks hardness metadata required by the simulator");
        }
        const size_t cluster = static_cast<size_t>(rec->hardness->style_cluster);
        if (cluster >= state.cluster_tables.size()) {
            state.cluster_tables.resize(cluster + 1, 0.0);
        }
        state.cluster_tables[cluster] += static_cast<double>(rec->gt_boxes.size());
    }
    return state;
}

namespace {

BoundingBox jitter_box(const BoundingBox& box, double magnitude, int width, int height,
                       Rng& rng) {
    BoundingBox out;
    out.x_min = box.x_min + rng.uniform(-magnitude, magnitude);
    out.y_min = box.y_min + rng.uniform(-magnitude, magnitude);
    out.x_max = box.x_max + rng.uniform(-magnitude, magnitude);
    out.y_max = box.y_max + rng.uniform(-magnitude, magnitude);
    if (out.x_min > out.x_max) std::swap(out.x_min, out.x_max);
    if (out.y_min > out.y_max) std::swap(out.y_min, out.y_max);
    out.x_min = std::clamp(out.x_min, 0.0, static_cast<double>(width));
    out.x_max = std::clamp(out.x_max, 0.0, static_cast<double>(width));
    out.y_min = std::clamp(out.y_min, 0.0, static_cast<double>(height));
    out.y_max = std::clamp(out.y_max, 0.0, static_cast<double>(height));
    return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

PredictionRecord sim_infer(const SimDetectorState& state, const DatasetRecord& image,
                           const SimConfig& config, bool want_masks, uint64_t seed) {
    if (!image.hardness) {
        throw config_error("sim_infer: image \"" + image.image_id +
                           "\" lacks hardness metadata required by the simulator");
    }
    Rng rng(combine_seed(combine_seed(state.noise_seed, fnv1a(image.image_id)), seed));
    const double comp = state.competence(image.hardness->style_cluster, config.m0);
    const double jitter = (1.0 - comp) * config.jitter_scale;

    PredictionRecord rec;
    rec.image_id = image.image_id;
    rec.image_width = image.width;
    rec.image_height = image.height;

    for (const auto& gt : image.gt_boxes) {
        if (!(rng.uniform() < comp)) continue;
        Detection det;
        det.box = jitter_box(gt, jitter, image.width, image.height, rng);
        // Centered on (1 + competence)/2: emitted boxes carry scores above a
        // detector's output threshold even when the model is weak.
        det.confidence = clamp01(0.5 + 0.5 * comp +
                                 (rng.uniform() - 0.5) * config.conf_noise * (1.0 - comp));
        rec.detections.push_back(det);
        if (image.hardness->overlap_prone && rng.uniform() < 1.0 - comp) {
            Detection dup;
            dup.box = jitter_box(gt, std::max(jitter, 1.0), image.width, image.height, rng);
            dup.confidence = clamp01(det.confidence * config.dup_conf_factor);
            rec.detections.push_back(dup);
        }
    }

    if (want_masks) {
        std::vector<BoundingBox> mask_boxes;
        mask_boxes.reserve(image.gt_boxes.size());
        for (const auto& gt : image.gt_boxes) {
            mask_boxes.push_back(jitter_box(gt, jitter, image.width, image.height, rng));
        }
        rec.segmentation_mask = rasterize_boxes(mask_boxes, image.width, image.height);
    }
    return rec;
}

SimDetector::SimDetector(SimConfig config, uint64_t noise_seed) : config_(config) {
    state_.noise_seed = noise_seed;
}

void SimDetector::add_images(const Dataset& dataset) {
    for (const auto& rec : dataset) {
        if (!rec.hardness) {
            throw config_error("SimDetector: image \"" + rec.image_id +
                               "\" lacks hardness metadata required by the simulator");
        }
        if (!images_.emplace(rec.image_id, rec).second) {
            throw std::invalid_argument("SimDetector: duplicate image_id \"" + rec.image_id +
                                        "\"");
        }
    }
}

const DatasetRecord& SimDetector::record(const std::string& id) const {
    const auto it = images_.find(id);
    if (it == images_.end()) {
        throw std::invalid_argument("SimDetector: unknown image_id \"" + id + "\"");
    }
    return it->second;
}

void SimDetector::train(const std::vector<std::string>& image_ids, bool warm_start) {
    std::vector<const DatasetRecord*> labeled;
    labeled.reserve(image_ids.size());
    for (const auto& id : image_ids) labeled.push_back(&record(id));
    state_ = sim_train(std::move(state_), labeled, warm_start);
}

std::vector<PredictionRecord> SimDetector::infer(const std::vector<std::string>& image_ids,
                                                 bool want_masks, uint64_t seed) {
    std::vector<PredictionRecord> out;
    out.reserve(image_ids.size());
    for (const auto& id : image_ids) {
        out.push_back(
            sim_infer(state_, record(id), config_, want_masks && config_.emit_masks, seed));
    }
    return out;
}

}  // namespace tabal
