#include "tabal/loop.hpp"

#include <algorithm>
#include <stdexcept>

#include "tabal/error.hpp"
#include "tabal/rng.hpp"

namespace tabal {

AnnotationOracle::AnnotationOracle(const Dataset& ground_truth) {
    for (const auto& rec : ground_truth) {
        if (!store_.emplace(rec.image_id, &rec).second) {
            throw std::invalid_argument("AnnotationOracle: duplicate image_id \"" + rec.image_id +
                                        "\"");
        }
    }
}

std::vector<DatasetRecord> AnnotationOracle::annotate(const std::vector<std::string>& ids) {
    std::vector<DatasetRecord> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = store_.find(id);
        if (it == store_.end()) {
            throw std::invalid_argument("annotate: no ground truth for image \"" + id + "\"");
        }
        if (!already_annotated_.insert(id).second) {
            throw std::logic_error("annotate: image \"" + id + "\" annotated twice");
        }
        out.push_back(*it->second);
        ++annotated_images_;
        annotated_boxes_ += static_cast<int64_t>(it->second->gt_boxes.size());
    }
    return out;
}

EvalReport evaluate_round(ModelAdapter& adapter, const Dataset& test_set,
                          const EvalConfig& config, uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(test_set.size());
    std::map<std::string, std::vector<BoundingBox>> gt_store;
    for (const auto& rec : test_set) {
        ids.push_back(rec.image_id);
        gt_store[rec.image_id] = rec.gt_boxes;
    }
    const auto preds = adapter.infer(ids, /*want_masks=*/false, seed);
    return evaluate(preds, gt_store, config);
}

namespace {

void validate(const Dataset& train_set, const LoopConfig& cfg) {
    const auto& b = cfg.budget;
    if (b.initial_size < 0 || b.total < 0 || b.step <= 0 || b.start < 0) {
        throw config_error("budget values must satisfy K >= 0, B >= 0, k > 0, epsilon >= 0");
    }
    if (b.initial_size > b.total) {
        throw config_error("initial labeled size K=" + std::to_string(b.initial_size) +
                           " exceeds total budget B=" + std::to_string(b.total));
    }
    if (static_cast<size_t>(b.initial_size) > train_set.size()) {
        throw config_error("initial labeled size K=" + std::to_string(b.initial_size) +
                           " exceeds dataset size " + std::to_string(train_set.size()));
    }
    std::set<std::string> seen;
    for (const auto& rec : train_set) {
        if (!seen.insert(rec.image_id).second) {
            throw std::invalid_argument("run_loop: duplicate image_id \"" + rec.image_id + "\"");
        }
    }
}

std::vector<std::string> sorted_ids(const std::set<std::string>& pool) {
    return {pool.begin(), pool.end()};
}

}  // namespace

LoopResult run_loop(const Dataset& train_set, const Dataset& test_set, ModelAdapter& adapter,
                    const LoopConfig& cfg, const RoundCallback& on_round) {
    validate(train_set, cfg);

    std::vector<std::string> all_ids;
    all_ids.reserve(train_set.size());
    for (const auto& rec : train_set) all_ids.push_back(rec.image_id);
    std::sort(all_ids.begin(), all_ids.end());

    // Random K-image seed set.
    Rng seed_rng(combine_seed(cfg.seed, "seed-pool"));
    seed_rng.shuffle(all_ids);

    BudgetState state;
    state.total_budget = cfg.budget.total;
    state.initial_size = cfg.budget.initial_size;
    state.step = cfg.budget.step;
    state.start = cfg.budget.start;
    state.consumed = cfg.budget.start;
    for (size_t i = 0; i < all_ids.size(); ++i) {
        if (i < static_cast<size_t>(cfg.budget.initial_size)) {
            state.labeled_pool.insert(all_ids[i]);
        } else {
            state.unlabeled_pool.insert(all_ids[i]);
        }
    }

    LoopResult result;
    result.seed_ids = sorted_ids(state.labeled_pool);

    AnnotationOracle oracle(train_set);
    const bool want_masks = cfg.strategy == Strategy::ma;

    adapter.train(result.seed_ids, /*warm_start=*/false);

    auto build_list = [&](uint64_t round_tag) {
        const auto pool = sorted_ids(state.unlabeled_pool);
        const auto preds =
            adapter.infer(pool, want_masks, combine_seed(cfg.seed, combine_seed(round_tag, "infer")));
        if (cfg.strategy == Strategy::ma) {
            const bool any_mask = std::any_of(preds.begin(), preds.end(), [](const auto& p) {
                return p.segmentation_mask.has_value();
            });
            if (!preds.empty() && !any_mask) {
                throw config_error(
                    "strategy \"ma\" requires segmentation masks, but inference produced none");
            }
        }
        const auto scores = score_all(preds, cfg.scoring);
        return build_candidates(scores, cfg.strategy, cfg.sampler,
                                combine_seed(cfg.seed, combine_seed(round_tag, "sample")));
    };

    CandidateList candidates = build_list(0);
    size_t cursor = 0;

    const int budget_remaining = cfg.budget.total - cfg.budget.initial_size;
    int round_index = 1;

    while (state.consumed <= budget_remaining) {
        const int allowance =
            budget_remaining - static_cast<int>(state.new_labeled_pool.size());
        const int take = std::min({cfg.budget.step, budget_remaining, allowance});
        if (take <= 0) break;

        std::vector<std::string> picked;
        while (static_cast<int>(picked.size()) < take && cursor < candidates.entries.size()) {
            picked.push_back(candidates.entries[cursor++].image_id);
        }
        if (picked.empty()) {
            result.truncated = true;
            break;
        }
        if (static_cast<int>(picked.size()) < take) result.truncated = true;

        oracle.annotate(picked);
        for (const auto& id : picked) {
            state.new_labeled_pool.insert(id);
            state.unlabeled_pool.erase(id);
        }

        if (cfg.training == TrainingMode::warm_start) {
            adapter.train(picked, /*warm_start=*/true);
        } else {
            // Literal reading: rebuild from the cumulative newly-labeled set only.
            adapter.train(sorted_ids(state.new_labeled_pool), /*warm_start=*/false);
        }

        SelectionRound round;
        round.round_index = round_index;
        round.strategy = cfg.strategy;
        round.picked_ids = picked;
        round.cumulative_labeled =
            cfg.budget.initial_size + static_cast<int>(state.new_labeled_pool.size());
        round.metrics = evaluate_round(adapter, test_set, cfg.eval,
                                       combine_seed(cfg.seed, combine_seed(round_index, "eval")));

        state.consumed += static_cast<int>(picked.size());
        result.rounds.push_back(round);
        if (on_round) on_round(state, round);

        ++round_index;
        if (cfg.mode == LoopMode::rescore && state.consumed <= budget_remaining &&
            !state.unlabeled_pool.empty()) {
            candidates = build_list(static_cast<uint64_t>(round_index));
            cursor = 0;
        }
    }

    result.annotation_count = oracle.annotated_images();
    return result;
}

}  // namespace tabal
