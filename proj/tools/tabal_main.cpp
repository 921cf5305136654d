// tabal: active-learning selection for single-class table detection.
//
// Subcommands: gen-corpus, score, select, loop, eval, compare.
// Exit codes: 0 success, 2 configuration/usage error, 3 file error,
// 4 internal error.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tabal/error.hpp"
#include "tabal/eval.hpp"
#include "tabal/io.hpp"
#include "tabal/loop.hpp"
#include "tabal/rng.hpp"
#include "tabal/sampler.hpp"
#include "tabal/scoring.hpp"
#include "tabal/simulator.hpp"

namespace fs = std::filesystem;
using namespace tabal;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + out_path + " for writing");
    out << content;
    if (!out) throw io_error("write failed: " + out_path);
}

// Shared flag bundle for the loop-driving commands.
struct LoopFlags {
    std::string dataset_path;
    std::string test_path;
    int K = 50;
    int B = 250;
    int k = 50;
    int epsilon = -1;  // default: k
    std::string mode = "static";
    std::string training = "warm";
    uint64_t seed = 0;
    std::string profile = "latex-like";
    double t_iou = -1.0;  // default: profile default
    double conf_floor = 0.5;
    std::vector<double> edges{40, 50, 60, 70, 80, 90, 95};
    double r_min = 40.0;
    double uncertainty_threshold = 95.0;
    double m0 = 8.0;
    double jitter_scale = 18.0;
    bool no_masks = false;
};

void add_loop_flags(CLI::App* cmd, LoopFlags& f) {
    cmd->add_option("--dataset", f.dataset_path, "Training pool dataset file")->required();
    cmd->add_option("--test-dataset", f.test_path, "Held-out evaluation dataset file")
        ->required();
    cmd->add_option("--K", f.K, "Initial labeled set size")->capture_default_str();
    cmd->add_option("--k", f.k, "Images annotated per round")->capture_default_str();
    cmd->add_option("--epsilon", f.epsilon, "Starting budget counter (default: k)");
    cmd->add_option("--mode", f.mode, "Candidate refresh: static|rescore")
        ->capture_default_str();
    cmd->add_option("--training", f.training, "Model update: warm|cold-literal")
        ->capture_default_str();
    cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    cmd->add_option("--profile", f.profile,
                    "Corpus profile for defaults: latex-like|word-like")
        ->capture_default_str();
    cmd->add_option("--t-iou", f.t_iou,
                    "BBA overlap threshold (default by profile: 0.006 word-like, 0.004 "
                    "latex-like)");
    cmd->add_option("--conf-floor", f.conf_floor, "Table-count confidence floor")
        ->capture_default_str();
    cmd->add_option("--edges", f.edges, "Confidence bin edges in percent")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--r-min", f.r_min, "Minimum confidence score for the rate formula")
        ->capture_default_str();
    cmd->add_option("--uncertainty-threshold", f.uncertainty_threshold,
                    "Exclude images at or above this mean confidence (percent)")
        ->capture_default_str();
    cmd->add_option("--m0", f.m0, "Simulator: labeled tables per cluster for competence 0.5")
        ->capture_default_str();
    cmd->add_option("--jitter-scale", f.jitter_scale,
                    "Simulator: box noise at zero competence, pixels")
        ->capture_default_str();
    cmd->add_flag("--sim-no-masks", f.no_masks,
                  "Simulator: do not emit segmentation masks");
}

RunConfig config_from_flags(const LoopFlags& f, Strategy strategy) {
    RunConfig cfg;
    cfg.strategy = strategy;
    cfg.edges = f.edges;
    cfg.r_min = f.r_min;
    cfg.uncertainty_threshold = f.uncertainty_threshold;
    cfg.sim.profile = profile_from_string(f.profile);
    cfg.t_iou = f.t_iou >= 0.0 ? f.t_iou : default_t_iou(cfg.sim.profile);
    cfg.conf_floor = f.conf_floor;
    cfg.budget.initial_size = f.K;
    cfg.budget.total = f.B;
    cfg.budget.step = f.k;
    cfg.budget.start = f.epsilon >= 0 ? f.epsilon : f.k;
    cfg.mode = loop_mode_from_string(f.mode);
    cfg.training = training_mode_from_string(f.training);
    cfg.seed = f.seed;
    cfg.sim.m0 = f.m0;
    cfg.sim.jitter_scale = f.jitter_scale;
    cfg.sim.emit_masks = !f.no_masks;
    return cfg;
}

LoopConfig loop_config(const RunConfig& cfg) {
    LoopConfig lc;
    lc.strategy = cfg.strategy;
    lc.sampler.edges = cfg.edges;
    lc.sampler.r_min = cfg.r_min;
    lc.sampler.uncertainty_threshold = cfg.uncertainty_threshold;
    lc.scoring.t_iou = cfg.t_iou;
    lc.scoring.conf_floor = cfg.conf_floor;
    lc.eval.thresholds = cfg.eval_thresholds;
    lc.budget = cfg.budget;
    lc.mode = cfg.mode;
    lc.training = cfg.training;
    lc.seed = cfg.seed;
    return lc;
}

// One full selection run on the simulator; per-round sink is optional.
LoopResult run_one(const Dataset& train, const Dataset& test, const RunConfig& cfg,
                   const RoundCallback& on_round = {}) {
    SimDetector detector(cfg.sim, combine_seed(cfg.seed, "detector"));
    detector.add_images(train);
    detector.add_images(test);
    return run_loop(train, test, detector, loop_config(cfg), on_round);
}

// ------------------------------------------------------------- subcommands

int cmd_gen_corpus(const std::string& profile, int n, uint64_t seed,
                   const std::string& out_path) {
    const auto corpus = generate_corpus(profile_from_string(profile), n, seed);
    emit(dataset_to_string(corpus), out_path);
    return 0;
}

int cmd_score(const std::string& predictions_path, double t_iou, double conf_floor,
              const std::string& out_path) {
    const auto records = read_predictions(predictions_path);
    ScoringConfig cfg;
    cfg.t_iou = t_iou;
    cfg.conf_floor = conf_floor;
    const auto scores = score_all(records, cfg);
    emit(scores_to_string(scores), out_path);
    return 0;
}

int cmd_select(const std::string& scores_path, const std::string& strategy_name, uint64_t seed,
               const std::vector<double>& edges, double r_min, double uncertainty_threshold,
               const std::string& out_path) {
    const auto scores = read_scores(scores_path);
    SamplerConfig cfg;
    cfg.edges = edges;
    cfg.r_min = r_min;
    cfg.uncertainty_threshold = uncertainty_threshold;
    const auto list =
        build_candidates(scores, strategy_from_string(strategy_name), cfg, seed);
    emit(candidates_to_string(list), out_path);
    return 0;
}

int cmd_eval(const std::string& predictions_path, const std::string& dataset_path,
             const std::vector<double>& thresholds, const std::string& out_path) {
    const auto preds = read_predictions(predictions_path);
    const auto dataset = read_dataset(dataset_path);
    std::map<std::string, std::vector<BoundingBox>> gt_store;
    for (const auto& rec : dataset) gt_store[rec.image_id] = rec.gt_boxes;
    EvalConfig cfg;
    cfg.thresholds = thresholds;
    const auto report = evaluate(preds, gt_store, cfg);
    emit(report_to_string(report), out_path);
    return 0;
}

int cmd_loop(const LoopFlags& flags, const std::string& strategy_name,
             const std::string& out_dir) {
    const RunConfig cfg = config_from_flags(flags, strategy_from_string(strategy_name));
    const auto train = read_dataset(flags.dataset_path);
    const auto test = read_dataset(flags.test_path);

    fs::create_directories(out_dir);
    const fs::path round_log = fs::path(out_dir) / "rounds.jsonl";
    fs::remove(round_log);
    write_config(cfg, fs::path(out_dir) / "config.json");

    const auto result = run_one(train, test, cfg,
                                [&](const BudgetState&, const SelectionRound& round) {
                                    append_round_log(round, round_log);
                                    std::cout << "round " << round.round_index << ": labeled "
                                              << round.cumulative_labeled
                                              << ", mAP@0.5 " << fmt6(round.metrics.map_50)
                                              << ", mAP@[.5:.95] "
                                              << fmt6(round.metrics.map_coco) << "\n";
                                });

    std::string csv = "round_index,cumulative_labeled,map_50,map_coco\n";
    for (const auto& r : result.rounds) {
        csv += std::to_string(r.round_index) + "," + std::to_string(r.cumulative_labeled) + "," +
               fmt6(r.metrics.map_50) + "," + fmt6(r.metrics.map_coco) + "\n";
    }
    emit(csv, (fs::path(out_dir) / "summary.csv").string());

    if (result.truncated) {
        std::cout << "warning: candidate list exhausted before the budget was spent\n";
    }
    std::cout << "completed " << result.rounds.size() << " rounds, " << result.annotation_count
              << " images annotated, outputs in " << out_dir << "\n";
    return 0;
}

struct CompareCell {
    Strategy strategy;
    int budget;
    uint64_t seed;
    double map_50 = 0.0;
    double map_coco = 0.0;
};

int cmd_compare(const LoopFlags& flags, std::vector<std::string> strategy_names,
                std::vector<int> budgets, std::vector<uint64_t> seeds,
                const std::string& out_dir, int workers) {
    if (strategy_names.empty()) throw config_error("compare: need at least one strategy");
    if (budgets.empty()) throw config_error("compare: need at least one budget");
    if (seeds.empty()) throw config_error("compare: need at least one seed");
    if (workers < 1) throw config_error("compare: workers must be >= 1");

    std::sort(strategy_names.begin(), strategy_names.end());
    std::sort(budgets.begin(), budgets.end());

    const auto train = read_dataset(flags.dataset_path);
    const auto test = read_dataset(flags.test_path);
    fs::create_directories(out_dir);

    std::vector<CompareCell> cells;
    for (const auto& name : strategy_names) {
        const Strategy strategy = strategy_from_string(name);
        for (int budget : budgets) {
            for (uint64_t seed : seeds) {
                cells.push_back({strategy, budget, seed});
            }
        }
    }

    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) break;
            CompareCell& cell = cells[i];
            try {
                RunConfig cfg = config_from_flags(flags, cell.strategy);
                cfg.budget.total = cell.budget;
                cfg.seed = cell.seed;
                char name[128];
                std::snprintf(name, sizeof(name), "%s_B%d_s%llu.rounds.jsonl",
                              to_string(cell.strategy).c_str(), cell.budget,
                              static_cast<unsigned long long>(cell.seed));
                const fs::path log = fs::path(out_dir) / name;
                fs::remove(log);
                const auto result = run_one(train, test, cfg);
                for (const auto& r : result.rounds) append_round_log(r, log);
                if (!result.rounds.empty()) {
                    cell.map_50 = result.rounds.back().metrics.map_50;
                    cell.map_coco = result.rounds.back().metrics.map_coco;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) {
                    try {
                        throw;
                    } catch (const std::exception& e) {
                        first_error = e.what();
                    }
                }
                break;
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw config_error("compare cell failed: " + first_error);

    // Aggregate mean and sample stddev over seeds per (strategy, budget).
    struct Agg {
        std::vector<double> map_50;
        std::vector<double> map_coco;
    };
    std::map<std::pair<std::string, int>, Agg> grid;
    for (const auto& cell : cells) {
        auto& agg = grid[{to_string(cell.strategy), cell.budget}];
        agg.map_50.push_back(cell.map_50);
        agg.map_coco.push_back(cell.map_coco);
    }
    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / v.size();
    };
    auto std_of = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean_of(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / (v.size() - 1));
    };

    std::string csv = "strategy,budget,map_50_mean,map_50_std,map_coco_mean,map_coco_std,seeds\n";
    for (const auto& [key, agg] : grid) {
        csv += key.first + "," + std::to_string(key.second) + "," + fmt6(mean_of(agg.map_50)) +
               "," + fmt6(std_of(agg.map_50)) + "," + fmt6(mean_of(agg.map_coco)) + "," +
               fmt6(std_of(agg.map_coco)) + "," + std::to_string(agg.map_50.size()) + "\n";
    }
    emit(csv, (fs::path(out_dir) / "summary.csv").string());

    // Plain-text grid of mAP@0.5 mean±std, strategies by row.
    std::string text;
    text += "strategy";
    for (int b : budgets) text += "\tB=" + std::to_string(b);
    text += "\n";
    for (const auto& name : strategy_names) {
        text += name;
        for (int b : budgets) {
            const auto& agg = grid.at({name, b});
            text += "\t" + fmt6(mean_of(agg.map_50)) + "±" + fmt6(std_of(agg.map_50));
        }
        text += "\n";
    }
    emit(text, (fs::path(out_dir) / "grid.txt").string());
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active-learning selection engine for single-class table detection"};
    app.require_subcommand(1);

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic dataset");
    std::string gen_profile = "latex-like";
    int gen_n = 0;
    uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--profile", gen_profile, "latex-like|word-like")->capture_default_str();
    gen->add_option("--n", gen_n, "Number of images")->required();
    gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output dataset file (default: stdout)");

    // score
    auto* score = app.add_subcommand("score", "Compute per-image strategy scores");
    std::string score_preds;
    double score_t_iou = 0.006;
    double score_conf_floor = 0.5;
    std::string score_out;
    score->add_option("--predictions", score_preds, "Predictions file")->required();
    score
        ->add_option("--t-iou", score_t_iou,
                     "BBA overlap threshold (0.006 word-like, 0.004 latex-like)")
        ->capture_default_str();
    score->add_option("--conf-floor", score_conf_floor, "Table-count confidence floor")
        ->capture_default_str();
    score->add_option("--out", score_out, "Output scores file (default: stdout)");

    // select
    auto* select = app.add_subcommand("select", "Build a candidate list from scores");
    std::string sel_scores;
    std::string sel_strategy;
    uint64_t sel_seed = 0;
    std::vector<double> sel_edges{40, 50, 60, 70, 80, 90, 95};
    double sel_r_min = 40.0;
    double sel_threshold = 95.0;
    std::string sel_out;
    select->add_option("--scores", sel_scores, "Scores file")->required();
    select
        ->add_option("--strategy", sel_strategy, "random|uncertainty|bba|ma|tc|entropy")
        ->required();
    select->add_option("--seed", sel_seed, "Random seed")->capture_default_str();
    select->add_option("--edges", sel_edges, "Confidence bin edges in percent")
        ->delimiter(',')
        ->capture_default_str();
    select->add_option("--r-min", sel_r_min, "Minimum confidence score for the rate formula")
        ->capture_default_str();
    select
        ->add_option("--uncertainty-threshold", sel_threshold,
                     "Exclude images at or above this mean confidence (percent)")
        ->capture_default_str();
    select->add_option("--out", sel_out, "Output candidates file (default: stdout)");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate predictions against ground truth");
    std::string ev_preds;
    std::string ev_dataset;
    std::vector<double> ev_thresholds = coco_thresholds();
    std::string ev_out;
    ev->add_option("--predictions", ev_preds, "Predictions file")->required();
    ev->add_option("--dataset", ev_dataset, "Ground-truth dataset file")->required();
    ev->add_option("--thresholds", ev_thresholds, "IoU matching thresholds")
        ->delimiter(',')
        ->capture_default_str();
    ev->add_option("--out", ev_out, "Output report file (default: stdout)");

    // loop
    auto* loop = app.add_subcommand("loop", "Run the budgeted selection loop");
    LoopFlags loop_flags;
    std::string loop_strategy;
    std::string loop_out_dir;
    loop->add_option("--strategy", loop_strategy, "random|uncertainty|bba|ma|tc|entropy")
        ->required();
    add_loop_flags(loop, loop_flags);
    loop->add_option("--B", loop_flags.B, "Total annotation budget")->capture_default_str();
    loop->add_option("--out-dir", loop_out_dir, "Output directory")
        ->envname("TABAL_OUT_DIR")
        ->required();

    // compare
    auto* cmp = app.add_subcommand("compare", "Strategy x budget comparison grid");
    LoopFlags cmp_flags;
    std::vector<std::string> cmp_strategies{"random", "uncertainty", "bba", "ma", "tc",
                                            "entropy"};
    std::vector<int> cmp_budgets;
    std::vector<uint64_t> cmp_seeds{1, 2, 3, 4, 5};
    std::string cmp_out_dir;
    int cmp_workers = 1;
    cmp->add_option("--strategies", cmp_strategies, "Strategies to compare")
        ->delimiter(',')
        ->capture_default_str();
    cmp->add_option("--budgets", cmp_budgets, "Total budgets B to sweep")
        ->delimiter(',')
        ->required();
    cmp->add_option("--seeds", cmp_seeds, "Seeds to average over")
        ->delimiter(',')
        ->capture_default_str();
    add_loop_flags(cmp, cmp_flags);
    cmp->add_option("--out-dir", cmp_out_dir, "Output directory")
        ->envname("TABAL_OUT_DIR")
        ->required();
    cmp->add_option("--workers", cmp_workers, "Parallel cells")
        ->envname("TABAL_WORKERS")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen_corpus(gen_profile, gen_n, gen_seed, gen_out);
        if (score->parsed()) return cmd_score(score_preds, score_t_iou, score_conf_floor, score_out);
        if (select->parsed()) {
            return cmd_select(sel_scores, sel_strategy, sel_seed, sel_edges, sel_r_min,
                              sel_threshold, sel_out);
        }
        if (ev->parsed()) return cmd_eval(ev_preds, ev_dataset, ev_thresholds, ev_out);
        if (loop->parsed()) return cmd_loop(loop_flags, loop_strategy, loop_out_dir);
        if (cmp->parsed()) {
            return cmd_compare(cmp_flags, cmp_strategies, cmp_budgets, cmp_seeds, cmp_out_dir,
                               cmp_workers);
        }
        return kExitConfig;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
