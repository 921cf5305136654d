#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "tabal/error.hpp"
#include "tabal/io.hpp"
#include "tabal/rng.hpp"
#include "tabal/sampler.hpp"
#include "test_support.hpp"

using namespace tabal;

namespace {

ImageScore score_of(const std::string& id, std::optional<double> conf) {
    ImageScore s;
    s.image_id = id;
    s.mean_confidence = conf;
    return s;
}

std::vector<ImageScore> scores_with_counts(const std::vector<int>& counts) {
    std::vector<ImageScore> scores;
    for (size_t i = 0; i < counts.size(); ++i) {
        ImageScore s;
        s.image_id = "img-" + std::to_string(i);
        s.table_count = counts[i];
        scores.push_back(s);
    }
    return scores;
}

const std::vector<double> kDefaultEdges{40, 50, 60, 70, 80, 90, 95};

}  // namespace

TEST_CASE("sampling_rate fixtures") {
    CHECK(sampling_rate(40, 40) == 100.0);
    CHECK(sampling_rate(70, 40) == 70.0);
    CHECK(sampling_rate(150, 40) == 0.0);
    CHECK_THROWS_AS(sampling_rate(30, 40), config_error);
}

TEST_CASE("sampling_rate is non-increasing in bin_low") {
    double prev = sampling_rate(40, 40);
    for (int low = 41; low <= 200; ++low) {
        const double now = sampling_rate(low, 40);
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("default edges give the published rate ladder") {
    std::vector<ConfidenceBin> bins = bin_by_confidence({}, kDefaultEdges, 95.0);
    assign_sampling_rates(bins, 40.0);
    REQUIRE(bins.size() == 6);
    const std::vector<double> expected{100, 90, 80, 70, 60, 50};
    for (size_t i = 0; i < bins.size(); ++i) {
        CHECK(bins[i].rate == expected[i]);
    }
}

TEST_CASE("bin_by_confidence membership rules") {
    std::vector<ImageScore> scores;
    scores.push_back(score_of("mid", 0.55));       // [50,60)
    scores.push_back(score_of("high", 0.97));      // excluded at threshold 95
    scores.push_back(score_of("low", 0.10));       // below first edge -> first bin
    scores.push_back(score_of("none", std::nullopt));  // no detections -> first bin
    scores.push_back(score_of("edge", 0.50));      // boundary belongs to [50,60)

    const auto bins = bin_by_confidence(scores, kDefaultEdges, 95.0);
    REQUIRE(bins.size() == 6);
    CHECK(bins[0].members == std::vector<std::string>{"low", "none"});
    CHECK(bins[1].members == std::vector<std::string>{"mid", "edge"});
    for (size_t i = 2; i < bins.size(); ++i) CHECK(bins[i].members.empty());
}

TEST_CASE("bin partition covers every non-excluded image exactly once") {
    Rng rng(404);
    std::vector<ImageScore> scores;
    for (int i = 0; i < 300; ++i) {
        scores.push_back(score_of("img-" + std::to_string(i),
                                  i % 7 == 0 ? std::nullopt : std::optional<double>(rng.uniform())));
    }
    const auto bins = bin_by_confidence(scores, kDefaultEdges, 95.0);
    std::set<std::string> seen;
    size_t total = 0;
    for (const auto& bin : bins) {
        for (const auto& id : bin.members) {
            CHECK(seen.insert(id).second);
            ++total;
        }
    }
    size_t excluded = 0;
    for (const auto& s : scores) {
        if (s.mean_confidence && *s.mean_confidence * 100.0 >= 95.0) ++excluded;
    }
    CHECK(total + excluded == scores.size());
}

TEST_CASE("bin_by_confidence validation") {
    CHECK_THROWS_AS(bin_by_confidence({}, {40}, 40), config_error);
    CHECK_THROWS_AS(bin_by_confidence({}, {40, 40}, 40), config_error);
    CHECK_THROWS_AS(bin_by_confidence({}, kDefaultEdges, 99), config_error);
}

TEST_CASE("sample_uncertainty draw sizes") {
    SUBCASE("23 members at rate 90 yield 21") {
        ConfidenceBin bin;
        bin.low = 50;
        bin.high = 60;
        bin.rate = 90;
        for (int i = 0; i < 23; ++i) bin.members.push_back("img-" + std::to_string(i));
        const auto list = sample_uncertainty({bin}, 1);
        CHECK(list.entries.size() == 21);
        for (const auto& e : list.entries) CHECK(e.weight == 90.0);
    }

    SUBCASE("all-zero rates yield an empty list") {
        ConfidenceBin bin;
        bin.rate = 0;
        for (int i = 0; i < 50; ++i) bin.members.push_back("img-" + std::to_string(i));
        CHECK(sample_uncertainty({bin, bin}, 1).entries.empty());
    }

    SUBCASE("exact products do not round up") {
        ConfidenceBin bin;
        bin.rate = 55;  // 0.55 * 20 is exactly 11
        for (int i = 0; i < 20; ++i) bin.members.push_back("img-" + std::to_string(i));
        CHECK(sample_uncertainty({bin}, 1).entries.size() == 11);
    }
}

TEST_CASE("sample_uncertainty is deterministic and bin-ordered") {
    Rng rng(505);
    std::vector<ImageScore> scores;
    for (int i = 0; i < 200; ++i) {
        scores.push_back(score_of("img-" + std::to_string(i), rng.uniform()));
    }
    auto bins = bin_by_confidence(scores, kDefaultEdges, 95.0);
    assign_sampling_rates(bins, 40.0);

    const auto a = sample_uncertainty(bins, 42);
    const auto b = sample_uncertainty(bins, 42);
    CHECK(candidates_to_string(a) == candidates_to_string(b));
    CHECK(candidates_to_string(a) != candidates_to_string(sample_uncertainty(bins, 43)));

    // Weights (bin rates) never increase along the list: lowest-confidence
    // bins come first.
    for (size_t i = 1; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].weight <= a.entries[i - 1].weight);
    }
}

TEST_CASE("sample_uncertainty never selects at or above the threshold") {
    Rng rng(606);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ImageScore> scores;
        std::map<std::string, double> conf;
        for (int i = 0; i < 50; ++i) {
            const std::string id = "img-" + std::to_string(i);
            const double c = rng.uniform();
            conf[id] = c;
            scores.push_back(score_of(id, c));
        }
        auto bins = bin_by_confidence(scores, kDefaultEdges, 95.0);
        assign_sampling_rates(bins, 40.0);
        for (const auto& e : sample_uncertainty(bins, trial).entries) {
            CHECK(conf.at(e.image_id) < 0.95);
        }
    }
}

TEST_CASE("rank_by_score sorts descending with absent MA last") {
    std::vector<ImageScore> scores(3);
    scores[0].image_id = "a";
    scores[0].bba = 0.0;
    scores[1].image_id = "b";
    scores[1].bba = 0.5;
    scores[2].image_id = "c";
    scores[2].bba = 1.0;

    const auto list = rank_by_score(scores, Strategy::bba, 9);
    REQUIRE(list.entries.size() == 3);
    CHECK(list.entries[0].image_id == "c");
    CHECK(list.entries[1].image_id == "b");
    CHECK(list.entries[2].image_id == "a");
    CHECK(list.entries[0].weight == 1.0);

    scores[0].ma = 0.2;
    scores[1].ma = std::nullopt;
    scores[2].ma = 0.9;
    const auto ma_list = rank_by_score(scores, Strategy::ma, 9);
    CHECK(ma_list.entries[0].image_id == "c");
    CHECK(ma_list.entries[1].image_id == "a");
    CHECK(ma_list.entries[2].image_id == "b");  // absent sorts last
    CHECK(ma_list.entries[2].weight == 0.0);
}

TEST_CASE("rank_by_score tie-break is seeded and reproducible") {
    std::vector<ImageScore> scores;
    for (int i = 0; i < 30; ++i) {
        ImageScore s;
        s.image_id = "img-" + std::to_string(i);
        s.entropy = 0.5;  // all equal
        scores.push_back(s);
    }
    const auto a = rank_by_score(scores, Strategy::entropy, 7);
    const auto b = rank_by_score(scores, Strategy::entropy, 7);
    CHECK(candidates_to_string(a) == candidates_to_string(b));
    const auto c = rank_by_score(scores, Strategy::entropy, 8);
    CHECK(candidates_to_string(a) != candidates_to_string(c));

    // Input order cannot matter: the tie keys attach to ids.
    auto reversed = scores;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(candidates_to_string(rank_by_score(reversed, Strategy::entropy, 7)) ==
          candidates_to_string(a));
}

TEST_CASE("weight_by_table_count weights and ordering") {
    SUBCASE("counts 1,2,3 normalize eligible weights to 2/5 and 3/5") {
        const auto list = weight_by_table_count(scores_with_counts({1, 2, 3}), 5);
        REQUIRE(list.entries.size() == 3);
        std::map<std::string, double> weight;
        for (const auto& e : list.entries) weight[e.image_id] = e.weight;
        CHECK(weight.at("img-1") == doctest::Approx(2.0 / 5.0));
        CHECK(weight.at("img-2") == doctest::Approx(3.0 / 5.0));
        CHECK(weight.at("img-0") == 0.0);
        // Eligible images precede the weight-0 tail.
        CHECK(list.entries[2].image_id == "img-0");
    }

    SUBCASE("all counts 1 leave only the random tail") {
        const auto list = weight_by_table_count(scores_with_counts({1, 1, 1, 1}), 5);
        CHECK(list.entries.size() == 4);
        for (const auto& e : list.entries) CHECK(e.weight == 0.0);
    }
}

TEST_CASE("weight_by_table_count equal counts make first position uniform") {
    // Chi-squared goodness of fit over the first pick, 5 images x 1000 seeds.
    const auto scores = scores_with_counts({2, 2, 2, 2, 2});
    std::map<std::string, int> firsts;
    const int trials = 1000;
    for (int seed = 0; seed < trials; ++seed) {
        firsts[weight_by_table_count(scores, seed).entries[0].image_id]++;
    }
    const double expected = trials / 5.0;
    double chi2 = 0.0;
    for (const auto& [id, n] : firsts) {
        chi2 += (n - expected) * (n - expected) / expected;
    }
    // 4 degrees of freedom, alpha = 0.01.
    CHECK(chi2 < 13.277);
}

TEST_CASE("weighted sampling prefers higher counts in the first position") {
    const auto scores = scores_with_counts({2, 6});
    int six_first = 0;
    const int trials = 2000;
    for (int seed = 0; seed < trials; ++seed) {
        if (weight_by_table_count(scores, seed).entries[0].image_id == "img-1") ++six_first;
    }
    // P(first = img-1) = 6/8.
    CHECK(six_first > trials * 0.70);
    CHECK(six_first < trials * 0.80);
}

TEST_CASE("random_baseline basics") {
    CHECK(random_baseline({}, 1).entries.empty());

    const std::vector<std::string> ids{"a", "b", "c", "d", "e"};
    const auto a = random_baseline(ids, 11);
    const auto b = random_baseline(ids, 11);
    CHECK(candidates_to_string(a) == candidates_to_string(b));
    for (const auto& e : a.entries) CHECK(e.weight == 1.0);
}

TEST_CASE("random_baseline first position is uniform over seeds") {
    const std::vector<std::string> ids{"a", "b", "c", "d", "e"};
    std::map<std::string, int> firsts;
    const int trials = 10000;
    for (int seed = 0; seed < trials; ++seed) {
        firsts[random_baseline(ids, seed).entries[0].image_id]++;
    }
    for (const auto& [id, n] : firsts) {
        CHECK(n / static_cast<double>(trials) == doctest::Approx(0.2).epsilon(0.1));
    }
}

TEST_CASE("candidate lists are permutations of input subsets") {
    Rng rng(707);
    std::vector<ImageScore> scores;
    std::set<std::string> input_ids;
    for (int i = 0; i < 80; ++i) {
        ImageScore s;
        s.image_id = "img-" + std::to_string(i);
        s.mean_confidence = rng.uniform();
        s.entropy = rng.uniform();
        s.bba = rng.uniform();
        if (i % 2 == 0) s.ma = rng.uniform();
        s.table_count = static_cast<int>(rng.bounded(4));
        input_ids.insert(s.image_id);
        scores.push_back(s);
    }
    SamplerConfig cfg;
    for (Strategy strategy : all_strategies()) {
        const auto list = build_candidates(scores, strategy, cfg, 3);
        std::set<std::string> seen;
        for (const auto& e : list.entries) {
            CHECK(input_ids.contains(e.image_id));
            CHECK(seen.insert(e.image_id).second);
            CHECK(e.weight >= 0.0);
        }
    }
}

TEST_CASE("build_candidates rejects ma when no image carries a mask score") {
    std::vector<ImageScore> scores(2);
    scores[0].image_id = "a";
    scores[1].image_id = "b";
    CHECK_THROWS_AS(build_candidates(scores, Strategy::ma, SamplerConfig{}, 1), config_error);
}
