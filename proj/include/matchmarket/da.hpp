// Deferred-acceptance engines.
//
// run_mosm is the sequential (McVitie-Wilson) man-proposing algorithm: men
// enter one at a time in ascending index order and each rejection chain runs
// to completion before the next man enters. Time t ticks once per proposal;
// the run stops at tau, the first t with delta_m[t] = delta_w[t] + k.
//
// run_wosm is the same engine with the roles swapped (women propose). In its
// trace the proposer side takes the "m" role: delta_m counts unmatched women,
// m_counts indexes women, w_counts indexes men, and the stopping identity
// holds with -k.
//
// run_mosm_lazy never materializes preference lists: each proposal goes to a
// uniform not-yet-proposed woman and is accepted with probability 1/(nu+1)
// where nu is the number of proposals the woman has received so far. The
// resulting (matching, trace) is distributed exactly as
// run_mosm(generate_market(cfg)); women's ranks of husbands are recovered by
// sample_woman_rank.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "matchmarket/market.hpp"
#include "matchmarket/matching.hpp"

namespace mm {

struct TraceOptions {
    bool record_series = true;  // delta_m/delta_w at every proposal time
    int stride = 1;             // decimation: keep t = 0, stride, 2*stride, ... and tau
    bool record_acceptance_prob = false;  // ex-ante p_t; costs O(list prefix) per step
};

struct RunTrace {
    std::int64_t tau = 0;  // total proposals at termination
    int delta_m = 0;       // unmatched proposers at tau (exhausted lists)
    int delta_w = 0;       // receivers never proposed to at tau

    // series[t/stride] = value after proposal t (index 0 = initial state);
    // the entry for t = tau is always present as the last element.
    std::vector<std::int32_t> delta_m_series;
    std::vector<std::int32_t> delta_w_series;
    int series_stride = 1;

    std::vector<std::int32_t> w_counts;  // proposals received per receiver, W_{j,tau}
    std::vector<std::int32_t> m_counts;  // proposals made per proposer, M_{i,tau}
    std::vector<double> acceptance_prob_series;  // p_t for t = 1..tau when enabled
};

struct DAResult {
    Matching matching;
    RunTrace trace;
};

DAResult run_mosm(const Market& market, const TraceOptions& opts = {});
DAResult run_wosm(const Market& market, const TraceOptions& opts = {});

struct LazyDAResult {
    Matching matching;
    RunTrace trace;
    // Realized degree |M_j| of every woman (proposals received plus sampled
    // never-proposing neighbors) and, for matched women, the rank of the
    // husband in her implied preference order (0 for unmatched women).
    std::vector<std::int32_t> woman_degree;
    std::vector<std::int32_t> woman_rank;
};

LazyDAResult run_mosm_lazy(const MarketConfig& cfg, const TraceOptions& opts = {});
LazyDAResult run_mosm_lazy(const MarketConfig& cfg, Rng& rng, const TraceOptions& opts = {});

// Rank of a woman's husband given that she received `received` of the
// `degree` proposals she would ever get: the husband beats the other
// received-1 proposals, and each of the degree-received men she never heard
// from outranks him independently with probability 1/(received+1).
// Exactly: rank = 1 + #{t <= degree-received : U_t > V}, V the maximum of
// `received` iid uniforms. E[rank] = 1 + (degree-received)/(received+1).
// Throws std::invalid_argument unless 1 <= received <= degree.
int sample_woman_rank(int received, int degree, Rng& rng);

// True iff every entry order yields the same matching as ascending order.
// Each order must be a permutation of the men; otherwise std::invalid_argument.
bool verify_order_independence(const Market& market,
                               std::span<const std::vector<std::int32_t>> orders);

}  // namespace mm
