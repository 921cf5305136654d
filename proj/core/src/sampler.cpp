#include "tabal/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "tabal/error.hpp"
#include "tabal/rng.hpp"

namespace tabal {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::random: return "random";
        case Strategy::uncertainty: return "uncertainty";
        case Strategy::bba: return "bba";
        case Strategy::ma: return "ma";
        case Strategy::tc: return "tc";
        case Strategy::entropy: return "entropy";
    }
    throw std::logic_error("unreachable strategy value");
}

Strategy strategy_from_string(const std::string& name) {
    for (Strategy s : all_strategies()) {
        if (to_string(s) == name) return s;
    }
    throw config_error("unknown strategy \"" + name +
                       "\" (expected random|uncertainty|bba|ma|tc|entropy)");
}

std::vector<Strategy> all_strategies() {
    return {Strategy::random, Strategy::uncertainty, Strategy::bba,
            Strategy::ma,     Strategy::tc,          Strategy::entropy};
}

double sampling_rate(double bin_low, double r_min) {
    if (bin_low < r_min) {
        throw config_error("sampling_rate: bin low " + std::to_string(bin_low) +
                           " is below the minimum confidence " + std::to_string(r_min));
    }
    return std::max(0.0, 100.0 - (bin_low - r_min));
}

std::vector<ConfidenceBin> bin_by_confidence(const std::vector<ImageScore>& scores,
                                             const std::vector<double>& edges,
                                             double uncertainty_threshold) {
    if (edges.size() < 2) {
        throw config_error("bin_by_confidence: need at least 2 edges, got " +
                           std::to_string(edges.size()));
    }
    for (size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i - 1] < edges[i])) {
            throw config_error("bin_by_confidence: edges must be strictly increasing");
        }
    }
    if (uncertainty_threshold > edges.back()) {
        throw config_error("bin_by_confidence: uncertainty threshold " +
                           std::to_string(uncertainty_threshold) +
                           " exceeds the last bin edge " + std::to_string(edges.back()));
    }

    std::vector<ConfidenceBin> bins(edges.size() - 1);
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        bins[i].low = edges[i];
        bins[i].high = edges[i + 1];
    }
    for (const auto& s : scores) {
        if (!s.mean_confidence.has_value()) {
            bins.front().members.push_back(s.image_id);  // no detections: most uncertain
            continue;
        }
        const double pct = *s.mean_confidence * 100.0;
        if (pct >= uncertainty_threshold) continue;  // confidently handled, excluded
        if (pct < edges.front()) {
            bins.front().members.push_back(s.image_id);
            continue;
        }
        const auto it = std::upper_bound(edges.begin(), edges.end(), pct);
        bins[static_cast<size_t>(it - edges.begin()) - 1].members.push_back(s.image_id);
    }
    return bins;
}

void assign_sampling_rates(std::vector<ConfidenceBin>& bins, double r_min) {
    for (auto& bin : bins) bin.rate = sampling_rate(bin.low, r_min);
}

namespace {

void require_unique_ids(const std::vector<ImageScore>& scores) {
    std::set<std::string> seen;
    for (const auto& s : scores) {
        if (!seen.insert(s.image_id).second) {
            throw std::invalid_argument("duplicate image_id \"" + s.image_id + "\"");
        }
    }
}

// One seeded uniform per id, assigned in lexicographic id order so the keys
// do not depend on input order.
std::map<std::string, double> draw_keys(const std::vector<std::string>& ids, Rng& rng) {
    std::vector<std::string> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    std::map<std::string, double> keys;
    for (const auto& id : sorted) keys[id] = rng.uniform_open();
    return keys;
}

}  // namespace

CandidateList sample_uncertainty(const std::vector<ConfidenceBin>& bins, uint64_t seed) {
    CandidateList list;
    list.strategy = Strategy::uncertainty;
    list.seed = seed;
    Rng rng(combine_seed(seed, "sample_uncertainty"));
    for (const auto& bin : bins) {
        std::vector<std::string> members = bin.members;
        std::sort(members.begin(), members.end());  // draws depend on the set, not input order
        const double want = bin.rate / 100.0 * static_cast<double>(members.size());
        // ceil with an epsilon so exact products do not round up.
        size_t n_take = static_cast<size_t>(std::max(0.0, std::ceil(want - 1e-9)));
        n_take = std::min(n_take, members.size());
        for (size_t i = 0; i < n_take; ++i) {
            const size_t j = i + static_cast<size_t>(rng.bounded(members.size() - i));
            std::swap(members[i], members[j]);
            list.entries.push_back({members[i], bin.rate});
        }
    }
    return list;
}

CandidateList rank_by_score(const std::vector<ImageScore>& scores, Strategy strategy,
                            uint64_t seed) {
    if (strategy != Strategy::bba && strategy != Strategy::ma && strategy != Strategy::entropy) {
        throw config_error("rank_by_score: strategy must be bba, ma or entropy");
    }
    require_unique_ids(scores);

    struct Row {
        const ImageScore* score;
        bool present;
        double value;
        double tie_key;
    };
    std::vector<std::string> ids;
    ids.reserve(scores.size());
    for (const auto& s : scores) ids.push_back(s.image_id);
    Rng rng(combine_seed(seed, "rank_by_score"));
    const auto keys = draw_keys(ids, rng);

    std::vector<Row> rows;
    rows.reserve(scores.size());
    for (const auto& s : scores) {
        Row row{&s, true, 0.0, keys.at(s.image_id)};
        switch (strategy) {
            case Strategy::bba: row.value = s.bba; break;
            case Strategy::entropy: row.value = s.entropy; break;
            case Strategy::ma:
                row.present = s.ma.has_value();
                row.value = s.ma.value_or(0.0);
                break;
            default: break;
        }
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.present != b.present) return a.present;  // absent scores sort last
        if (a.value != b.value) return a.value > b.value;
        if (a.tie_key != b.tie_key) return a.tie_key < b.tie_key;
        return a.score->image_id < b.score->image_id;
    });

    CandidateList list;
    list.strategy = strategy;
    list.seed = seed;
    for (const auto& row : rows) {
        list.entries.push_back({row.score->image_id, row.present ? row.value : 0.0});
    }
    return list;
}

CandidateList weight_by_table_count(const std::vector<ImageScore>& scores, uint64_t seed) {
    require_unique_ids(scores);
    std::vector<std::string> ids;
    ids.reserve(scores.size());
    for (const auto& s : scores) ids.push_back(s.image_id);
    Rng rng(combine_seed(seed, "weight_by_table_count"));
    const auto keys = draw_keys(ids, rng);

    double total = 0.0;
    for (const auto& s : scores) {
        if (s.table_count > 1) total += s.table_count;
    }

    // Exponential-race keys -ln(u)/count realize weighted sampling without
    // replacement; ineligible images shuffle uniformly behind them.
    struct Row {
        const ImageScore* score;
        double order_key;
    };
    std::vector<Row> eligible;
    std::vector<Row> rest;
    for (const auto& s : scores) {
        const double u = keys.at(s.image_id);
        if (s.table_count > 1) {
            eligible.push_back({&s, -std::log(u) / static_cast<double>(s.table_count)});
        } else {
            rest.push_back({&s, u});
        }
    }
    auto by_key = [](const Row& a, const Row& b) {
        if (a.order_key != b.order_key) return a.order_key < b.order_key;
        return a.score->image_id < b.score->image_id;
    };
    std::sort(eligible.begin(), eligible.end(), by_key);
    std::sort(rest.begin(), rest.end(), by_key);

    CandidateList list;
    list.strategy = Strategy::tc;
    list.seed = seed;
    for (const auto& row : eligible) {
        list.entries.push_back({row.score->image_id, row.score->table_count / total});
    }
    for (const auto& row : rest) {
        list.entries.push_back({row.score->image_id, 0.0});
    }
    return list;
}

CandidateList random_baseline(const std::vector<std::string>& image_ids, uint64_t seed) {
    {
        std::set<std::string> seen;
        for (const auto& id : image_ids) {
            if (!seen.insert(id).second) {
                throw std::invalid_argument("duplicate image_id \"" + id + "\"");
            }
        }
    }
    Rng rng(combine_seed(seed, "random_baseline"));
    const auto keys = draw_keys(image_ids, rng);
    std::vector<std::string> order = image_ids;
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        const double ka = keys.at(a);
        const double kb = keys.at(b);
        if (ka != kb) return ka < kb;
        return a < b;
    });
    CandidateList list;
    list.strategy = Strategy::random;
    list.seed = seed;
    for (const auto& id : order) list.entries.push_back({id, 1.0});
    return list;
}

CandidateList build_candidates(const std::vector<ImageScore>& scores, Strategy strategy,
                               const SamplerConfig& config, uint64_t seed) {
    switch (strategy) {
        case Strategy::random: {
            std::vector<std::string> ids;
            ids.reserve(scores.size());
            for (const auto& s : scores) ids.push_back(s.image_id);
            return random_baseline(ids, seed);
        }
        case Strategy::uncertainty: {
            auto bins = bin_by_confidence(scores, config.edges, config.uncertainty_threshold);
            assign_sampling_rates(bins, config.r_min);
            auto list = sample_uncertainty(bins, seed);
            return list;
        }
        case Strategy::ma: {
            const bool any_ma =
                std::any_of(scores.begin(), scores.end(),
                            [](const ImageScore& s) { return s.ma.has_value(); });
            if (!scores.empty() && !any_ma) {
                throw config_error(
                    "strategy \"ma\" requires segmentation masks, but no image has one");
            }
            return rank_by_score(scores, strategy, seed);
        }
        case Strategy::bba:
        case Strategy::entropy:
            return rank_by_score(scores, strategy, seed);
        case Strategy::tc:
            return weight_by_table_count(scores, seed);
    }
    throw std::logic_error("unreachable strategy value");
}

}  // namespace tabal
