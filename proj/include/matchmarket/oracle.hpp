// Independent verification machinery: brute-force stable-matching
// enumeration, blocking-pair detection, and the balls-into-bins process the
// property tests lean on. Nothing here shares code with the DA engines.
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "matchmarket/market.hpp"
#include "matchmarket/matching.hpp"
#include "matchmarket/rng.hpp"

namespace mm::oracle {

// Ragged bipartite preference lists (best first). Covers both the
// fixed-degree Market and the seat-split school-choice reduction.
struct PrefLists {
    std::vector<std::vector<std::int32_t>> men;
    std::vector<std::vector<std::int32_t>> women;
};

PrefLists from_market(const Market& market);

// Some blocking pair, or nullopt iff the matching is stable. Unmatched is
// worse than any listed partner.
std::optional<std::pair<int, int>> find_blocking_pair(const PrefLists& prefs,
                                                      const Matching& matching);
std::optional<std::pair<int, int>> find_blocking_pair(const Market& market,
                                                      const Matching& matching);

// All stable matchings by exhaustive search with partial-stability pruning.
// Guarded to at most 10 agents per side; beyond that throws
// std::runtime_error. The returned list is nonempty for any valid input.
std::vector<Matching> enumerate_stable_matchings(const PrefLists& prefs);
std::vector<Matching> enumerate_stable_matchings(const Market& market);

// T balls dropped independently and uniformly into `bins` bins; per-bin
// counts. bins >= 1, balls >= 0.
std::vector<std::int64_t> balls_into_bins(std::int64_t balls, int bins, Rng& rng);

inline std::int64_t empty_bins(const std::vector<std::int64_t>& counts) {
    std::int64_t c = 0;
    for (auto w : counts) c += (w == 0);
    return c;
}

// Empirical mean over `runs` processes of (1/n) * sum_j 1/(W_j + 1).
double reciprocal_sum_check(std::int64_t balls, int bins, int runs, Rng& rng);

// Exact mean of the same statistic: (n/(T+1)) * (1 - (1 - 1/n)^(T+1)).
double reciprocal_sum_reference(std::int64_t balls, int bins);

}  // namespace mm::oracle
