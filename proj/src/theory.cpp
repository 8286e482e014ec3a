#include "matchmarket/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mm::theory {

Prediction predict_moderate(int n, int d) {
    if (n < 1 || d < 1) throw std::invalid_argument("predict_moderate: need n >= 1, d >= 1");
    Prediction p;
    p.regime = Regime::moderate;
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    p.r_men_pred = sqrt_d;
    p.r_women_pred = sqrt_d;
    p.delta_pred = n * std::exp(-sqrt_d);
    p.rank_band = std::pow(static_cast<double>(d), 0.3);
    p.log_count_band = 2.5 * std::pow(static_cast<double>(d), 0.25);
    return p;
}

Prediction predict_dense(int n, int k, int d) {
    if (n < 2 || d < 2) throw std::invalid_argument("predict_dense: need n >= 2, d >= 2");
    Prediction p;
    p.regime = Regime::dense;
    const double log_n = std::log(static_cast<double>(n));
    p.r_men_pred = log_n;
    p.r_women_pred = d / log_n;
    p.delta_pred = 0.0;  // all short-side agents matched
    p.r_men_upper = (1.0 + 2.0 * std::abs(k) / n + 2.0 / std::sqrt(log_n)) * log_n;
    p.r_women_lower =
        (1.0 - 6.0 * std::pow(static_cast<double>(n), -0.125) - 6.0 * d / n) * d / log_n;
    return p;
}

Prediction predict_complete_akl(int n, int k, double eps) {
    if (k >= 0) throw std::invalid_argument("predict_complete_akl: stated for men on the short side (k < 0)");
    if (k < -n / 2 || n < 1)
        throw std::invalid_argument("predict_complete_akl: need -n/2 <= k <= -1");
    if (eps <= 0.0) throw std::invalid_argument("predict_complete_akl: eps must be positive");
    Prediction p;
    p.regime = Regime::complete;
    const double men = n + k;
    p.r_men_pred = (1.0 + eps) * (n / men) * std::log(static_cast<double>(n) / std::abs(k));
    p.r_women_pred = men / (1.0 + p.r_men_pred);
    p.delta_pred = 0.0;
    return p;
}

double coupon_collector_tail(int n, double beta) {
    if (n < 1) throw std::invalid_argument("coupon_collector_tail: need n >= 1");
    if (beta <= 1.0)
        throw std::invalid_argument("coupon_collector_tail: bound requires beta > 1, got " +
                                    std::to_string(beta));
    return std::pow(static_cast<double>(n), 1.0 - beta);
}

}  // namespace mm::theory
