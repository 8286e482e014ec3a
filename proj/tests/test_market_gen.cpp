#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "matchmarket/market.hpp"
#include "testutil.hpp"

using namespace mm;

TEST_CASE("config validation") {
    CHECK_THROWS_AS((MarketConfig{.n = 0, .k = 0, .d = 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MarketConfig{.n = 5, .k = 0, .d = 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MarketConfig{.n = 5, .k = 0, .d = 6}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MarketConfig{.n = 5, .k = -6, .d = 3}.validate()), std::invalid_argument);
    CHECK_NOTHROW((MarketConfig{.n = 5, .k = -5, .d = 5}.validate()));  // zero men is allowed
    Rng rng = make_rng(1);
    CHECK_THROWS_AS(sample_d_subset(4, 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_d_subset(4, 5, rng), std::invalid_argument);
}

TEST_CASE("d = n forces the full set") {
    Rng rng = make_rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        auto s = sample_d_subset(5, 5, rng);
        std::sort(s.begin(), s.end());
        CHECK(s == std::vector<std::int32_t>{0, 1, 2, 3, 4});
    }
    auto one = sample_d_subset(1, 1, rng);
    CHECK(one == std::vector<std::int32_t>{0});
}

TEST_CASE("subsets are uniform over the 6 pairs of C(4,2)") {
    Rng rng = make_rng(20240601);
    const int draws = 100000;
    std::map<std::pair<int, int>, int> freq;
    for (int t = 0; t < draws; ++t) {
        auto s = sample_d_subset(4, 2, rng);
        std::sort(s.begin(), s.end());
        ++freq[{s[0], s[1]}];
    }
    CHECK(freq.size() == 6);
    const double p = 1.0 / 6.0;
    const double tol = 3.0 * std::sqrt(p * (1 - p) / draws);
    for (const auto& [pair, count] : freq)
        CHECK(std::abs(static_cast<double>(count) / draws - p) < tol);
}

TEST_CASE("sampled order is a uniform permutation") {
    Rng rng = make_rng(99);
    const int draws = 60000;
    std::map<std::pair<int, int>, int> freq;
    for (int t = 0; t < draws; ++t) {
        const auto s = sample_d_subset(3, 2, rng);
        ++freq[{s[0], s[1]}];
    }
    CHECK(freq.size() == 6);  // ordered pairs
    const double p = 1.0 / 6.0;
    const double tol = 3.0 * std::sqrt(p * (1 - p) / draws);
    for (const auto& [pair, count] : freq)
        CHECK(std::abs(static_cast<double>(count) / draws - p) < tol);
}

TEST_CASE("regeneration is bit-identical") {
    const MarketConfig cfg{.n = 50, .k = 3, .d = 7, .seed = 0xfeedbeef};
    const auto a = generate_market(cfg);
    const auto b = generate_market(cfg);
    CHECK(a.men_prefs == b.men_prefs);
    CHECK(a.w_men == b.w_men);
    CHECK(a.w_rank_at == b.w_rank_at);
    CHECK(a.m_rank_at == b.m_rank_at);
    MarketConfig other = cfg;
    other.seed = cfg.seed + 1;
    CHECK(generate_market(other).men_prefs != a.men_prefs);
}

TEST_CASE("structure invariants on random markets") {
    Rng seeds = make_rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        const auto cfg = testutil::random_small_config(seeds, 8, 3);
        const auto m = generate_market(cfg);
        // every man's list has exactly d distinct entries
        for (int i = 0; i < m.num_men(); ++i) {
            std::set<std::int32_t> s(m.man_list(i).begin(), m.man_list(i).end());
            CHECK(static_cast<int>(s.size()) == m.d);
        }
        // sum of woman degrees equals (n+k)*d, and woman lists are exactly the listers
        int total = 0;
        for (int j = 0; j < m.n; ++j) {
            total += m.woman_degree(j);
            for (const auto i : m.woman_list(j)) CHECK(m.rank_of_woman(i, j) > 0);
        }
        CHECK(total == m.num_men() * m.d);
        // cross-link arrays invert each other
        for (int i = 0; i < m.num_men(); ++i)
            for (int s = 0; s < m.d; ++s) {
                const auto j = m.man_list(i)[s];
                const auto wr = m.w_rank_at[static_cast<std::size_t>(i) * m.d + s];
                CHECK(m.woman_list(j)[wr - 1] == i);
                CHECK(m.m_rank_at[m.w_off[j] + wr - 1] == s + 1);
            }
    }
}

TEST_CASE("complete market: every woman has degree n+k") {
    const MarketConfig cfg{.n = 6, .k = 2, .d = 6, .seed = 11};
    const auto m = generate_market(cfg);
    for (int j = 0; j < m.n; ++j) CHECK(m.woman_degree(j) == 8);
}

TEST_CASE("woman degrees match Binomial(n+k, d/n) moments over 100 seeds") {
    const int n = 1000, d = 10, seeds = 100;
    std::vector<double> degrees;
    degrees.reserve(static_cast<std::size_t>(n) * seeds);
    for (int s = 0; s < seeds; ++s) {
        const MarketConfig cfg{.n = n, .k = 0, .d = d, .seed = 4000u + static_cast<std::uint64_t>(s)};
        const auto m = generate_market(cfg);
        for (int j = 0; j < n; ++j) degrees.push_back(m.woman_degree(j));
    }
    // The per-market mean is (n+k)d/n by the edge-count identity; check it
    // exactly, then the variance against the binomial at 3 sigma.
    const double mean = testutil::mean_of(degrees);
    CHECK(mean == doctest::Approx(10.0).epsilon(1e-12));
    const double p = static_cast<double>(d) / n, q = 1 - p;
    const double var_target = n * p * q;  // 9.9
    const double sd = testutil::stddev_of(degrees);
    const double var = sd * sd;
    // SE of the sample variance from binomial fourth central moment
    const double mu4 = 3 * var_target * var_target + var_target * (1 - 6 * p * q);
    const double se = std::sqrt((mu4 - var_target * var_target) / degrees.size());
    CHECK(std::abs(var - var_target) < 3 * se);
}
