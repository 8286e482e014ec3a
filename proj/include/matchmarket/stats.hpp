// Rank and unmatched-count statistics, connectivity and hop-distance
// measures of a realized market.
#pragma once

#include <cstdint>
#include <vector>

#include "matchmarket/da.hpp"
#include "matchmarket/market.hpp"
#include "matchmarket/matching.hpp"
#include "matchmarket/rng.hpp"

namespace mm {

struct RankSummary {
    double r_men = 0.0;    // mean rank of wives; unmatched men count as d+1
    double r_women = 0.0;  // mean rank of husbands; unmatched women count as |M_j|+1
    int delta_m = 0;
    int delta_w = 0;
};

// Exact averages for a matching of this market. Throws std::invalid_argument
// if the matching is inconsistent with the market (wrong sizes, broken
// bijection, or a matched pair that is not graph-adjacent).
RankSummary summarize(const Market& market, const Matching& matching);

// Same statistics for a lazy run, which carries its own degrees and ranks.
RankSummary summarize(const LazyDAResult& result, const MarketConfig& cfg);

// Connected components of the bipartite agent graph; isolated women count.
int count_components(const Market& market);

// BFS from `sample` distinct uniformly chosen men over the man-man graph
// (two men adjacent iff they list a common woman). Returns the cumulative
// fraction of ordered (source, other man) pairs within h hops for
// h = 1..max_hops. Requires sample <= number of men and max_hops >= 1.
std::vector<double> hop_fractions(const Market& market, int sample, int max_hops, Rng& rng);

}  // namespace mm
