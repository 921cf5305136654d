#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tabal/io.hpp"
#include "tabal/loop.hpp"
#include "tabal/scoring.hpp"

namespace tabal {

// Synthetic pages reuse the dataset record: gt_boxes are the tables and
// hardness is always present.
using SyntheticImage = DatasetRecord;

// Page-layout knobs for corpus generation. Defaults are documented here and
// fixed; the profile picks cluster count, table-count distribution and
// layout irregularity.
struct CorpusParams {
    int min_width = 88;
    int max_width = 128;
    int min_height = 112;
    int max_height = 168;
    double overlap_prone_fraction = 0.25;
};

// Latent style clusters per profile: word-like pages are more varied.
int cluster_count(CorpusProfile profile);

// Probability of an image having 1, 2, ... tables. latex-like draws more
// multi-table pages than word-like.
const std::vector<double>& table_count_pmf(CorpusProfile profile);

// Seeded corpus: every image has at least one table, boxes have integer
// coordinates inside the page, hardness.table_count matches gt_boxes.
Dataset generate_corpus(CorpusProfile profile, int n_images, uint64_t seed,
                        const CorpusParams& params = {});

// Detector skill per style cluster: competence(c) = m_c / (m_c + m0) where
// m_c counts annotated tables seen from cluster c.
struct SimDetectorState {
    std::vector<double> cluster_tables;
    uint64_t noise_seed = 0;

    double competence(int cluster, double m0) const;
};

// Accumulate (warm_start) or rebuild the competence counts from a labeled
// batch.
SimDetectorState sim_train(SimDetectorState state,
                           const std::vector<const DatasetRecord*>& labeled, bool warm_start);

// Per ground-truth table: emit a detection with probability competence,
// jittered by (1 - competence) * jitter_scale and confidence centered on
// (1 + competence)/2 with noise shrinking as competence grows. Overlap-prone
// images duplicate each emitted box with probability (1 - competence). The
// segmentation mask is an independently jittered rasterization of the ground
// truth. Deterministic per (state, image, seed).
PredictionRecord sim_infer(const SimDetectorState& state, const DatasetRecord& image,
                           const SimConfig& config, bool want_masks, uint64_t seed);

// ModelAdapter backed by the simulator. Images must carry hardness metadata;
// register every dataset (train and test) the loop will touch.
class SimDetector final : public ModelAdapter {
public:
    SimDetector(SimConfig config, uint64_t noise_seed);

    void add_images(const Dataset& dataset);

    void train(const std::vector<std::string>& image_ids, bool warm_start) override;
    std::vector<PredictionRecord> infer(const std::vector<std::string>& image_ids,
                                        bool want_masks, uint64_t seed) override;

    const SimDetectorState& state() const { return state_; }

private:
    SimConfig config_;
    SimDetectorState state_;
    std::map<std::string, DatasetRecord> images_;

    const DatasetRecord& record(const std::string& id) const;
};

}  // namespace tabal
