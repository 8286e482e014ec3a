// Random partially connected matching markets.
//
// A market has n women and n+k men; every man ranks a uniformly random
// d-subset of the women, and every woman ranks the men who listed her in a
// uniformly random order. Indices are 0-based throughout the library;
// external file formats are 1-based.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "matchmarket/rng.hpp"

namespace mm {

struct MarketConfig {
    int n = 0;           // number of women
    int k = 0;           // imbalance: men = n + k (may be negative or zero)
    int d = 0;           // length of every man's preference list, 1 <= d <= n
    std::uint64_t seed = 0;

    int num_men() const { return n + k; }

    // Throws std::invalid_argument unless n >= 1, 1 <= d <= n, n + k >= 0.
    void validate() const;
};

// Materialized preference structure. Both sides are stored flat:
//   men_prefs[i*d + s]   woman at slot s (rank s+1) of man i's list
//   w_men[w_off[j] + p]  man at priority position p (rank p+1) of woman j
// plus two cross-link arrays that give the opposite side's rank of the same
// edge in O(1):
//   w_rank_at[i*d + s]   = Rank_j(i) where j = men_prefs[i*d + s]
//   m_rank_at[w_off[j]+p] = Rank_i(j) where i = w_men[w_off[j] + p]
struct Market {
    int n = 0;
    int k = 0;
    int d = 0;
    std::vector<std::int32_t> men_prefs;
    std::vector<std::int32_t> w_off;    // size n+1
    std::vector<std::int32_t> w_men;    // size (n+k)*d
    std::vector<std::int32_t> w_rank_at;
    std::vector<std::int32_t> m_rank_at;

    int num_men() const { return n + k; }
    int num_women() const { return n; }

    std::span<const std::int32_t> man_list(int i) const {
        return {men_prefs.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
    }
    std::span<const std::int32_t> woman_list(int j) const {
        return {w_men.data() + w_off[j], static_cast<std::size_t>(w_off[j + 1] - w_off[j])};
    }
    int woman_degree(int j) const { return w_off[j + 1] - w_off[j]; }

    // 1-based rank of woman j on man i's list, 0 if he does not list her. O(d).
    int rank_of_woman(int i, int j) const;
    // 1-based rank of man i on woman j's list, 0 if not a neighbor. O(|M_j|).
    int rank_of_man(int j, int i) const;
};

// Uniformly random d-subset of {0,...,n-1}, emitted in uniformly random
// order (a uniform d-permutation). Partial Fisher-Yates, O(d) expected for
// d much smaller than n. Throws std::invalid_argument if d < 1 or d > n.
std::vector<std::int32_t> sample_d_subset(int n, int d, Rng& rng);

// Draws the full market from cfg.seed. Regeneration with an identical
// config is bit-identical.
Market generate_market(const MarketConfig& cfg);

// Same, but consuming an external stream (cfg.seed ignored).
Market generate_market(const MarketConfig& cfg, Rng& rng);

}  // namespace mm
