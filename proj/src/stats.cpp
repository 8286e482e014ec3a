#include "matchmarket/stats.hpp"

#include <numeric>
#include <queue>
#include <stdexcept>

namespace mm {

namespace {

void check_consistent(const Market& market, const Matching& mu) {
    if (static_cast<int>(mu.man_to_woman.size()) != market.num_men() ||
        static_cast<int>(mu.woman_to_man.size()) != market.num_women())
        throw std::invalid_argument("summarize: matching size does not fit market");
    for (int i = 0; i < market.num_men(); ++i) {
        const auto w = mu.man_to_woman[i];
        if (w == Matching::kUnmatched) continue;
        if (w < 0 || w >= market.num_women() || mu.woman_to_man[w] != i)
            throw std::invalid_argument("summarize: matching is not a partial bijection");
        if (market.rank_of_woman(i, w) == 0)
            throw std::invalid_argument("summarize: matched pair is not adjacent in the market");
    }
    for (int j = 0; j < market.num_women(); ++j) {
        const auto i = mu.woman_to_man[j];
        if (i == Matching::kUnmatched) continue;
        if (i < 0 || i >= market.num_men() || mu.man_to_woman[i] != j)
            throw std::invalid_argument("summarize: matching is not a partial bijection");
    }
}

}  // namespace

RankSummary summarize(const Market& market, const Matching& mu) {
    check_consistent(market, mu);
    RankSummary s;
    std::int64_t men_rank_sum = 0;
    for (int i = 0; i < market.num_men(); ++i) {
        const auto w = mu.man_to_woman[i];
        if (w == Matching::kUnmatched) {
            ++s.delta_m;
            men_rank_sum += market.d + 1;
        } else {
            men_rank_sum += market.rank_of_woman(i, w);
        }
    }
    std::int64_t women_rank_sum = 0;
    for (int j = 0; j < market.num_women(); ++j) {
        const auto i = mu.woman_to_man[j];
        if (i == Matching::kUnmatched) {
            ++s.delta_w;
            women_rank_sum += market.woman_degree(j) + 1;
        } else {
            women_rank_sum += market.rank_of_man(j, i);
        }
    }
    const int men = market.num_men();
    s.r_men = men > 0 ? static_cast<double>(men_rank_sum) / men : 0.0;
    s.r_women = market.n > 0 ? static_cast<double>(women_rank_sum) / market.n : 0.0;
    return s;
}

RankSummary summarize(const LazyDAResult& result, const MarketConfig& cfg) {
    RankSummary s;
    s.delta_m = result.trace.delta_m;
    s.delta_w = result.trace.delta_w;
    const int men = cfg.num_men();
    // Matched men married their last proposal, so the men's rank sum is
    // tau adjusted for the d+1 convention on exhausted unmatched lists.
    s.r_men = men > 0 ? static_cast<double>(result.trace.tau + s.delta_m) / men : 0.0;
    std::int64_t women_rank_sum = 0;
    for (int j = 0; j < cfg.n; ++j)
        women_rank_sum += result.woman_rank[j] > 0 ? result.woman_rank[j]
                                                   : result.woman_degree[j] + 1;
    s.r_women = static_cast<double>(women_rank_sum) / cfg.n;
    return s;
}

int count_components(const Market& market) {
    const int men = market.num_men();
    const int total = men + market.n;
    std::vector<std::int32_t> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (int i = 0; i < men; ++i)
        for (const auto j : market.man_list(i)) {
            const auto a = find(i);
            const auto b = find(men + j);
            if (a != b) parent[a] = b;
        }
    int components = 0;
    for (int v = 0; v < total; ++v) components += (find(v) == v);
    return components;
}

std::vector<double> hop_fractions(const Market& market, int sample, int max_hops, Rng& rng) {
    const int men = market.num_men();
    if (sample < 0 || sample > men)
        throw std::invalid_argument("hop_fractions: sample must be in [0, number of men]");
    if (max_hops < 1) throw std::invalid_argument("hop_fractions: max_hops must be >= 1");

    std::vector<double> fractions(max_hops, 0.0);
    if (sample == 0 || men < 2) return fractions;

    // Sources without replacement.
    std::vector<std::int32_t> order(men);
    std::iota(order.begin(), order.end(), 0);
    for (int s = 0; s < sample; ++s) {
        const int q = s + uniform_index(rng, men - s);
        std::swap(order[s], order[q]);
    }

    std::vector<std::int32_t> man_epoch(men, -1), woman_epoch(market.n, -1);
    std::vector<std::int32_t> frontier, next_frontier;
    std::vector<std::int64_t> reached(max_hops, 0);

    for (int s = 0; s < sample; ++s) {
        const std::int32_t src = order[s];
        man_epoch[src] = s;
        frontier.assign(1, src);
        for (int hop = 1; hop <= max_hops && !frontier.empty(); ++hop) {
            next_frontier.clear();
            for (const auto i : frontier)
                for (const auto j : market.man_list(i)) {
                    if (woman_epoch[j] == s) continue;
                    woman_epoch[j] = s;
                    for (const auto i2 : market.woman_list(j)) {
                        if (man_epoch[i2] == s) continue;
                        man_epoch[i2] = s;
                        next_frontier.push_back(i2);
                    }
                }
            reached[hop - 1] += static_cast<std::int64_t>(next_frontier.size());
            frontier.swap(next_frontier);
        }
    }

    const double denom = static_cast<double>(sample) * (men - 1);
    std::int64_t cumulative = 0;
    for (int h = 0; h < max_hops; ++h) {
        cumulative += reached[h];
        fractions[h] = static_cast<double>(cumulative) / denom;
    }
    return fractions;
}

}  // namespace mm
