// Closed-form prediction curves used as figure overlays and acceptance
// targets. Logs are natural throughout.
#pragma once

#include <optional>

namespace mm::theory {

enum class Regime { moderate, dense, complete };

struct Prediction {
    double r_men_pred = 0.0;
    double r_women_pred = 0.0;
    double delta_pred = 0.0;  // expected unmatched count per side (when meaningful)
    Regime regime = Regime::moderate;

    // Optional envelopes around the point predictions.
    std::optional<double> rank_band;       // additive band on ranks
    std::optional<double> log_count_band;  // |log delta - log delta_pred| band
    std::optional<double> r_men_upper;     // quantitative upper bound (dense regime)
    std::optional<double> r_women_lower;   // quantitative lower bound (dense regime)
};

// Moderately connected regime: both sides near sqrt(d), about n*exp(-sqrt(d))
// unmatched per side. Band d^0.3 on ranks, 2.5*d^(1/4) on log counts.
Prediction predict_moderate(int n, int d);

// Densely connected regime (men short side expected): r_men ~ log n,
// r_women ~ d/log n, all men matched. Quantitative envelopes
// (1 + 2|k|/n + 2/sqrt(log n))*log n and (1 - 6 n^(-1/8) - 6 d/n)*d/log n.
Prediction predict_dense(int n, int k, int d);

// Fully connected markets with men on the short side (-n/2 <= k <= -1):
// r_men <= (1+eps)*(n/(n+k))*log(n/|k|), r_women = (n+k)/(1 + r_men).
// Throws std::invalid_argument for k >= 0, k < -n/2 or eps <= 0.
Prediction predict_complete_akl(int n, int k, double eps);

// P(draws >= beta * n * log n) <= n^(1-beta) for the coupon collector with n
// coupons. Throws std::invalid_argument unless beta > 1 and n >= 1.
double coupon_collector_tail(int n, double beta);

}  // namespace mm::theory
