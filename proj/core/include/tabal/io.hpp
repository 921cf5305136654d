#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tabal/eval.hpp"
#include "tabal/geometry.hpp"
#include "tabal/sampler.hpp"
#include "tabal/scoring.hpp"

// Line-delimited on-disk formats. Every writer is deterministic: fixed key
// order, floats printed with printf "%.6g", one record per line with a
// trailing newline. Readers reject any invariant violation instead of
// repairing it; a missing final newline is reported as truncation. The full
// grammar lives in docs/formats/.

namespace tabal {

// Latent difficulty metadata attached to synthetic images.
struct Hardness {
    int style_cluster = 0;
    bool overlap_prone = false;
    int table_count = 0;
};

struct DatasetRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<BoundingBox> gt_boxes;
    std::optional<Hardness> hardness;
};
using Dataset = std::vector<DatasetRecord>;

// One completed round of the selection loop; also the round-log line format.
struct SelectionRound {
    int round_index = 0;
    Strategy strategy = Strategy::random;
    std::vector<std::string> picked_ids;
    int cumulative_labeled = 0;  // seed set plus all rounds so far
    EvalReport metrics;
};

enum class LoopMode { static_once, rescore };
enum class TrainingMode { warm_start, literal_cold };
enum class CorpusProfile { latex_like, word_like };

std::string to_string(LoopMode m);
std::string to_string(TrainingMode m);
std::string to_string(CorpusProfile p);
LoopMode loop_mode_from_string(const std::string& s);
TrainingMode training_mode_from_string(const std::string& s);
CorpusProfile profile_from_string(const std::string& s);

// Algorithm budget parameters: K seed images, B total budget, k per-round
// step, epsilon starting budget counter.
struct BudgetConfig {
    int initial_size = 50;  // K
    int total = 250;        // B
    int step = 50;          // k
    int start = 50;         // epsilon
};

// Detector-simulator knobs. m0 is the cluster count of labeled tables at
// which competence reaches 0.5; jitter and confidence noise shrink linearly
// as competence grows.
struct SimConfig {
    CorpusProfile profile = CorpusProfile::latex_like;
    double m0 = 8.0;
    double jitter_scale = 18.0;
    double conf_noise = 0.3;
    double dup_conf_factor = 0.9;
    bool emit_masks = true;
};

// Every knob of a full selection run. Defaults are the published constants:
// uncertainty threshold 95, bin edges 40..95, BBA t_iou 0.006 (word-like)
// or 0.004 (latex-like).
struct RunConfig {
    Strategy strategy = Strategy::random;
    std::vector<double> edges{40, 50, 60, 70, 80, 90, 95};
    double r_min = 40.0;
    double uncertainty_threshold = 95.0;
    double t_iou = 0.006;
    double conf_floor = 0.5;
    BudgetConfig budget;
    LoopMode mode = LoopMode::static_once;
    TrainingMode training = TrainingMode::warm_start;
    uint64_t seed = 0;
    std::vector<double> eval_thresholds = coco_thresholds();
    SimConfig sim;
};

// Default BBA threshold for a corpus profile.
double default_t_iou(CorpusProfile profile);

Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::vector<PredictionRecord>& records,
                       const std::filesystem::path& path);

std::vector<ImageScore> read_scores(const std::filesystem::path& path);
void write_scores(const std::vector<ImageScore>& scores, const std::filesystem::path& path);

CandidateList read_candidates(const std::filesystem::path& path);
void write_candidates(const CandidateList& list, const std::filesystem::path& path);

// The round log is append-only; every line is self-contained.
void append_round_log(const SelectionRound& round, const std::filesystem::path& path);
std::vector<SelectionRound> read_round_log(const std::filesystem::path& path);

RunConfig read_config(const std::filesystem::path& path);
void write_config(const RunConfig& config, const std::filesystem::path& path);

EvalReport read_report(const std::filesystem::path& path);
void write_report(const EvalReport& report, const std::filesystem::path& path);

// Serialized forms used by both the file writers and determinism tests.
std::string dataset_to_string(const Dataset& dataset);
std::string predictions_to_string(const std::vector<PredictionRecord>& records);
std::string scores_to_string(const std::vector<ImageScore>& scores);
std::string candidates_to_string(const CandidateList& list);
std::string round_to_string(const SelectionRound& round);
std::string config_to_string(const RunConfig& config);
std::string report_to_string(const EvalReport& report);

}  // namespace tabal
