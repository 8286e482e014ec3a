#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "matchmarket/theory.hpp"

using namespace mm::theory;

TEST_CASE("moderate regime point predictions") {
    const auto p = predict_moderate(1001, 20);
    CHECK(p.r_men_pred == doctest::Approx(std::sqrt(20.0)).epsilon(1e-12));
    CHECK(p.r_men_pred == doctest::Approx(4.4721).epsilon(1e-4));
    CHECK(p.r_women_pred == p.r_men_pred);
    CHECK(p.delta_pred == doctest::Approx(11.459).epsilon(1e-3));
    CHECK(*p.rank_band == doctest::Approx(std::pow(20.0, 0.3)).epsilon(1e-12));
    CHECK(*p.log_count_band == doctest::Approx(2.5 * std::pow(20.0, 0.25)).epsilon(1e-12));

    const auto sparse = predict_moderate(1001, 1);
    CHECK(sparse.r_men_pred == 1.0);
    CHECK(sparse.delta_pred == doctest::Approx(1001.0 / std::exp(1.0)).epsilon(1e-12));
    CHECK(sparse.delta_pred == doctest::Approx(368.24).epsilon(1e-4));

    CHECK(predict_moderate(1001, 16).r_men_pred == 4.0);
    CHECK_THROWS_AS(predict_moderate(10, 0), std::invalid_argument);
}

TEST_CASE("dense regime point predictions and envelopes") {
    const auto p = predict_dense(1001, -1, 100);
    CHECK(p.r_men_pred == doctest::Approx(6.9088).epsilon(1e-4));
    CHECK(p.r_women_pred == doctest::Approx(14.474).epsilon(1e-3));
    CHECK(p.delta_pred == 0.0);
    CHECK(*p.r_men_upper > p.r_men_pred);
    CHECK(*p.r_women_lower < p.r_women_pred);

    CHECK(predict_dense(1001, -1, 450).r_women_pred == doctest::Approx(65.13).epsilon(1e-3));
    CHECK_THROWS_AS(predict_dense(1, -1, 10), std::invalid_argument);
}

TEST_CASE("fully connected bound") {
    const auto p = predict_complete_akl(1000, -1, 0.01);
    CHECK(p.r_men_pred == doctest::Approx(6.9837).epsilon(1e-3));
    // long side does roughly n/log n: the bound's complement sits in the
    // right order of magnitude (the narrative benchmark is ~145)
    CHECK(p.r_women_pred == doctest::Approx(999.0 / (1.0 + p.r_men_pred)).epsilon(1e-12));
    CHECK(p.r_women_pred > 100.0);
    CHECK(p.r_women_pred < 160.0);

    // continuity at the extreme k = -n/2: 2*log(2) scaled form stays finite
    const auto ext = predict_complete_akl(1000, -500, 1e-9);
    CHECK(ext.r_men_pred == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-6));

    CHECK_THROWS_AS(predict_complete_akl(1000, 0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(predict_complete_akl(1000, 1, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(predict_complete_akl(1000, -501, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(predict_complete_akl(1000, -1, 0.0), std::invalid_argument);
}

TEST_CASE("coupon collector tail bound") {
    CHECK(coupon_collector_tail(10, 2.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(coupon_collector_tail(100, 1.5) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(coupon_collector_tail(100, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(coupon_collector_tail(0, 2.0), std::invalid_argument);
}

TEST_CASE("regime curves cross within one rank unit of d = log^2 n") {
    for (const int n : {100, 500, 1000, 2500, 100000}) {
        const double log_n = std::log(static_cast<double>(n));
        const int d = static_cast<int>(std::ceil(log_n * log_n));
        const auto moderate = predict_moderate(n, d);
        const auto dense = predict_dense(n, -1, d);
        CHECK(std::abs(moderate.r_men_pred - dense.r_men_pred) <= 1.0);
    }
}

TEST_CASE("monotonicity in d") {
    double prev_m = 0.0, prev_w = 0.0;
    for (int d = 2; d <= 400; d += 7) {
        const auto m = predict_moderate(1000, d);
        const auto w = predict_dense(1000, -1, d);
        CHECK(m.r_men_pred > prev_m);
        CHECK(w.r_women_pred > prev_w);
        CHECK(w.r_men_pred == predict_dense(1000, -1, 2).r_men_pred);  // constant in d
        prev_m = m.r_men_pred;
        prev_w = w.r_women_pred;
    }
}
