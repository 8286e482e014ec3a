#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "matchmarket/da.hpp"
#include "matchmarket/oracle.hpp"
#include "testutil.hpp"

using namespace mm;

namespace {

// Naive O((n*d)^2) blocking-pair existence check, written independently of
// the library path: scan every adjacent (man, woman) pair.
bool naive_has_blocking_pair(const Market& m, const Matching& mu) {
    for (int i = 0; i < m.num_men(); ++i)
        for (const auto j : m.man_list(i)) {
            const int rank_j = m.rank_of_woman(i, j);
            const auto mi = mu.man_to_woman[i];
            const bool i_prefers = mi == Matching::kUnmatched || rank_j < m.rank_of_woman(i, mi);
            if (!i_prefers) continue;
            const auto mj = mu.woman_to_man[j];
            const bool j_prefers =
                mj == Matching::kUnmatched || m.rank_of_man(j, i) < m.rank_of_man(j, mj);
            if (j_prefers) return true;
        }
    return false;
}

// Random feasible matching on the market graph (not necessarily stable).
Matching random_matching(const Market& m, Rng& rng) {
    Matching mu;
    mu.man_to_woman.assign(m.num_men(), Matching::kUnmatched);
    mu.woman_to_man.assign(m.num_women(), Matching::kUnmatched);
    for (int i = 0; i < m.num_men(); ++i) {
        if (uniform01(rng) < 0.3) continue;
        const auto list = m.man_list(i);
        const auto j = list[uniform_index(rng, m.d)];
        if (mu.woman_to_man[j] == Matching::kUnmatched) {
            mu.man_to_woman[i] = j;
            mu.woman_to_man[j] = i;
        }
    }
    return mu;
}

}  // namespace

TEST_CASE("blocking pair on the swapped 2x2 matching") {
    const auto m = testutil::first_choice_2x2();
    Matching good{{0, 1}, {0, 1}};
    CHECK(!oracle::find_blocking_pair(m, good));
    Matching swapped{{1, 0}, {1, 0}};
    CHECK(oracle::find_blocking_pair(m, swapped));
    // PrefLists overload agrees
    const auto prefs = oracle::from_market(m);
    CHECK(!oracle::find_blocking_pair(prefs, good));
    CHECK(oracle::find_blocking_pair(prefs, swapped));
}

TEST_CASE("blocking-pair detector agrees with the naive double loop") {
    Rng rng = make_rng(37);
    for (int it = 0; it < 300; ++it) {
        const auto cfg = testutil::random_small_config(rng, 6, 2);
        const auto m = generate_market(cfg);
        const auto mu = random_matching(m, rng);
        const auto found = oracle::find_blocking_pair(m, mu);
        CHECK(found.has_value() == naive_has_blocking_pair(m, mu));
        if (found) {
            const auto [i, j] = *found;
            // verify the returned pair actually blocks
            const auto mi = mu.man_to_woman[i];
            CHECK((mi == Matching::kUnmatched ||
                   m.rank_of_woman(i, j) < m.rank_of_woman(i, mi)));
            const auto mj = mu.woman_to_man[j];
            CHECK((mj == Matching::kUnmatched || m.rank_of_man(j, i) < m.rank_of_man(j, mj)));
        }
        CHECK(oracle::find_blocking_pair(oracle::from_market(m), mu).has_value() ==
              found.has_value());
    }
}

TEST_CASE("enumeration at the textbook poles") {
    const auto single = oracle::enumerate_stable_matchings(testutil::first_choice_2x2());
    CHECK(single.size() == 1);
    CHECK(single[0].man_to_woman == std::vector<std::int32_t>{0, 1});

    const auto both = oracle::enumerate_stable_matchings(testutil::cyclic_2x2());
    CHECK(both.size() == 2);
    CHECK(both[0].man_to_woman != both[1].man_to_woman);
}

TEST_CASE("enumeration refuses oversized instances") {
    const MarketConfig cfg{.n = 11, .k = 0, .d = 2, .seed = 3};
    CHECK_THROWS_AS(oracle::enumerate_stable_matchings(generate_market(cfg)), std::runtime_error);
}

TEST_CASE("unmatched sets identical across every enumerated stable matching") {
    Rng rng = make_rng(1009);
    for (int it = 0; it < 200; ++it) {
        const auto cfg = testutil::random_small_config(rng, 5, 2);
        const auto m = generate_market(cfg);
        const auto all = oracle::enumerate_stable_matchings(m);
        REQUIRE(!all.empty());
        for (const auto& mu : all) {
            CHECK(!oracle::find_blocking_pair(m, mu));
            for (int i = 0; i < m.num_men(); ++i)
                CHECK((mu.man_to_woman[i] == Matching::kUnmatched) ==
                      (all[0].man_to_woman[i] == Matching::kUnmatched));
            for (int j = 0; j < m.num_women(); ++j)
                CHECK((mu.woman_to_man[j] == Matching::kUnmatched) ==
                      (all[0].woman_to_man[j] == Matching::kUnmatched));
        }
    }
}

TEST_CASE("balls into bins: degenerate and accounting") {
    Rng rng = make_rng(8);
    const auto none = oracle::balls_into_bins(0, 10, rng);
    CHECK(oracle::empty_bins(none) == 10);
    const auto counts = oracle::balls_into_bins(1000, 17, rng);
    std::int64_t total = 0;
    for (const auto c : counts) total += c;
    CHECK(total == 1000);
    CHECK_THROWS_AS(oracle::balls_into_bins(5, 0, rng), std::invalid_argument);
}

TEST_CASE("empty-bin fraction matches (1-1/n)^T at 3 sigma") {
    const int n = 100, T = 100, runs = 10000;
    Rng rng = make_rng(555);
    std::vector<double> fractions;
    fractions.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        const auto counts = oracle::balls_into_bins(T, n, rng);
        fractions.push_back(static_cast<double>(oracle::empty_bins(counts)) / n);
    }
    const double target = std::pow(1.0 - 1.0 / n, T);  // 0.366032...
    CHECK(std::abs(testutil::mean_of(fractions) - target) < 3 * testutil::se_of_mean(fractions));
    // Hoeffding-style tail from the concentration lemma, checked empirically.
    const double eps = 0.05;
    int outside = 0;
    for (const auto f : fractions) outside += (std::abs(f - target) >= eps);
    CHECK(static_cast<double>(outside) / runs <= 2 * std::exp(-2.0 * n * eps * eps));
}

TEST_CASE("reciprocal sum: exact degenerate case and closed form") {
    Rng rng = make_rng(77);
    // T=1, n=1: the single bin holds one ball, statistic is exactly 1/2.
    CHECK(oracle::reciprocal_sum_check(1, 1, 50, rng) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(oracle::reciprocal_sum_reference(1, 1) == doctest::Approx(0.5).epsilon(1e-12));

    const int T = 100, n = 100, runs = 4000;
    const double ref = oracle::reciprocal_sum_reference(T, n);
    CHECK(ref == doctest::Approx((100.0 / 101.0) * (1.0 - std::pow(0.99, 101))).epsilon(1e-12));
    std::vector<double> vals;
    for (int r = 0; r < runs; ++r) vals.push_back(oracle::reciprocal_sum_check(T, n, 1, rng));
    CHECK(std::abs(testutil::mean_of(vals) - ref) < 3 * testutil::se_of_mean(vals));
    // the lemma's displayed bound: mean <= n/T
    for (const auto [t, b] : std::vector<std::pair<int, int>>{{10, 10}, {100, 50}, {500, 100}})
        CHECK(oracle::reciprocal_sum_reference(t, b) <= static_cast<double>(b) / t);
}

TEST_CASE("DA unmatched women are dominated by empty bins at t = n") {
    // E[delta_w[t]] <= E[empty bins after t balls] + noise, spot-checked at
    // n = 200, t = n, k = 0, d = 20 (tau > n on every draw here).
    const int n = 200, reps = 1500;
    std::vector<double> dw, eb;
    Rng rng = make_rng(31337);
    for (int r = 0; r < reps; ++r) {
        const MarketConfig cfg{.n = n, .k = 0, .d = 20,
                               .seed = derive_seed(2024, 0, static_cast<std::uint64_t>(r))};
        const auto res = run_mosm(generate_market(cfg));
        REQUIRE(res.trace.tau >= n);
        dw.push_back(res.trace.delta_w_series[n]);
        eb.push_back(static_cast<double>(oracle::empty_bins(oracle::balls_into_bins(n, n, rng))));
    }
    const double se = std::sqrt(testutil::se_of_mean(dw) * testutil::se_of_mean(dw) +
                                testutil::se_of_mean(eb) * testutil::se_of_mean(eb));
    CHECK(testutil::mean_of(dw) <= testutil::mean_of(eb) + 3 * se);
}
