#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tabal/eval.hpp"
#include "tabal/io.hpp"
#include "tabal/sampler.hpp"
#include "tabal/scoring.hpp"

namespace tabal {

// Abstraction over the detector being trained. train() receives image ids
// whose labels just became available; with warm_start the model keeps its
// previous state, without it the state is rebuilt from the given batch
// alone. infer() must be deterministic for a fixed trained state and seed.
class ModelAdapter {
public:
    virtual ~ModelAdapter() = default;
    virtual void train(const std::vector<std::string>& image_ids, bool warm_start) = 0;
    virtual std::vector<PredictionRecord> infer(const std::vector<std::string>& image_ids,
                                                bool want_masks, uint64_t seed) = 0;
};

// Simulated human annotator: hands out stored ground truth and meters the
// annotation cost. Asking for an id twice is a logic error, as is asking for
// an id without ground truth.
class AnnotationOracle {
public:
    explicit AnnotationOracle(const Dataset& ground_truth);

    std::vector<DatasetRecord> annotate(const std::vector<std::string>& ids);

    int64_t annotated_images() const { return annotated_images_; }
    int64_t annotated_boxes() const { return annotated_boxes_; }

private:
    std::map<std::string, const DatasetRecord*> store_;
    std::set<std::string> already_annotated_;
    int64_t annotated_images_ = 0;
    int64_t annotated_boxes_ = 0;
};

// Budget bookkeeping for the selection loop. Pools are pairwise disjoint and
// together cover the full training set.
struct BudgetState {
    int total_budget = 0;  // B
    int initial_size = 0;  // K
    int step = 0;          // k
    int start = 0;         // epsilon
    int consumed = 0;      // b
    std::set<std::string> labeled_pool;      // initial K ids
    std::set<std::string> new_labeled_pool;  // annotated during the loop
    std::set<std::string> unlabeled_pool;
};

struct LoopConfig {
    Strategy strategy = Strategy::random;
    SamplerConfig sampler;
    ScoringConfig scoring;
    EvalConfig eval;
    BudgetConfig budget;
    LoopMode mode = LoopMode::static_once;
    TrainingMode training = TrainingMode::warm_start;
    uint64_t seed = 0;
};

struct LoopResult {
    std::vector<SelectionRound> rounds;
    bool truncated = false;  // candidate list ran out before the budget did
    std::vector<std::string> seed_ids;
    int64_t annotation_count = 0;
};

using RoundCallback = std::function<void(const BudgetState&, const SelectionRound&)>;

// Inference on the held-out set followed by evaluation against its ground
// truth.
EvalReport evaluate_round(ModelAdapter& adapter, const Dataset& test_set,
                          const EvalConfig& config, uint64_t seed);

// Budgeted active-learning selection: train on K random seed images, score
// the unlabeled pool, then per round annotate the next min(k, remaining)
// candidates, retrain, and evaluate, until the budget B is spent. In static
// mode the candidate list is built once from the initial model; rescore mode
// rebuilds it from fresh inference every round.
LoopResult run_loop(const Dataset& train_set, const Dataset& test_set, ModelAdapter& adapter,
                    const LoopConfig& config, const RoundCallback& on_round = {});

}  // namespace tabal
