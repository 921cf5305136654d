#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabal/scoring.hpp"

namespace tabal {

// Stable strategy identifiers; the strings below are the ones CLI flags and
// output files use.
enum class Strategy { random, uncertainty, bba, ma, tc, entropy };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);  // throws config_error
std::vector<Strategy> all_strategies();

// One confidence range [low, high) in percent, its member images, and the
// sampling rate assigned to it.
struct ConfidenceBin {
    double low = 0.0;
    double high = 0.0;
    std::vector<std::string> members;
    double rate = 0.0;  // percent
};

struct CandidateEntry {
    std::string image_id;
    double weight = 0.0;
};

// Ranked/weighted selection order for one strategy. Entries are a
// permutation of a subset of the input ids, ordered by descending priority.
struct CandidateList {
    Strategy strategy = Strategy::random;
    uint64_t seed = 0;
    std::vector<CandidateEntry> entries;
};

struct SamplerConfig {
    std::vector<double> edges{40, 50, 60, 70, 80, 90, 95};  // percent
    double r_min = 40.0;                                    // percent
    double uncertainty_threshold = 95.0;                    // percent
};

// r_j = max(0, 100 - (bin_low - r_min)). Throws config_error when bin_low
// falls below r_min.
double sampling_rate(double bin_low, double r_min);

// Partition images into half-open bins [edge_i, edge_i+1) of mean confidence
// (in percent). Images at or above uncertainty_threshold are excluded;
// images below the first edge, or with no detections at all, land in the
// first bin. Rates are left at 0; assign via sampling_rate.
std::vector<ConfidenceBin> bin_by_confidence(const std::vector<ImageScore>& scores,
                                             const std::vector<double>& edges,
                                             double uncertainty_threshold);

// Fill each bin's rate from the r_j formula.
void assign_sampling_rates(std::vector<ConfidenceBin>& bins, double r_min);

// From each bin draw ceil(rate/100 * |members|) members without replacement,
// concatenated in ascending-confidence bin order. Entry weight is the bin
// rate.
CandidateList sample_uncertainty(const std::vector<ConfidenceBin>& bins, uint64_t seed);

// Rank descending by the strategy's score (bba, ma or entropy). Absent MA
// scores sort last with weight 0. Ties are broken by a seeded per-id key,
// then lexicographic image_id.
CandidateList rank_by_score(const std::vector<ImageScore>& scores, Strategy strategy,
                            uint64_t seed);

// Images with more than one predicted table are ordered by weighted sampling
// without replacement, weight proportional to table count; the rest follow
// in seeded-random order with weight 0.
CandidateList weight_by_table_count(const std::vector<ImageScore>& scores, uint64_t seed);

// Uniform seeded shuffle, all weights 1.
CandidateList random_baseline(const std::vector<std::string>& image_ids, uint64_t seed);

// Dispatch to the strategy's builder. Throws config_error when strategy is
// "ma" but no input score carries a mask ambiguity value.
CandidateList build_candidates(const std::vector<ImageScore>& scores, Strategy strategy,
                               const SamplerConfig& config, uint64_t seed);

}  // namespace tabal
