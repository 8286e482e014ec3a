#include "matchmarket/oracle.hpp"

#include <stdexcept>
#include <string>

namespace mm::oracle {

PrefLists from_market(const Market& market) {
    PrefLists p;
    p.men.resize(market.num_men());
    for (int i = 0; i < market.num_men(); ++i) {
        const auto list = market.man_list(i);
        p.men[i].assign(list.begin(), list.end());
    }
    p.women.resize(market.num_women());
    for (int j = 0; j < market.num_women(); ++j) {
        const auto list = market.woman_list(j);
        p.women[j].assign(list.begin(), list.end());
    }
    return p;
}

std::optional<std::pair<int, int>> find_blocking_pair(const PrefLists& prefs,
                                                      const Matching& mu) {
    const int n_men = static_cast<int>(prefs.men.size());
    const int n_women = static_cast<int>(prefs.women.size());
    // Dense rank lookup; this overload is meant for oracle-scale inputs.
    std::vector<std::vector<std::int32_t>> wrank(n_women,
                                                 std::vector<std::int32_t>(n_men, 0));
    for (int j = 0; j < n_women; ++j)
        for (int p = 0; p < static_cast<int>(prefs.women[j].size()); ++p)
            wrank[j][prefs.women[j][p]] = p + 1;

    std::vector<std::int32_t> husband_rank(n_women, 0);
    for (int j = 0; j < n_women; ++j)
        if (mu.woman_to_man[j] != Matching::kUnmatched)
            husband_rank[j] = wrank[j][mu.woman_to_man[j]];

    for (int i = 0; i < n_men; ++i) {
        const auto& list = prefs.men[i];
        for (const auto j : list) {
            if (j == mu.man_to_woman[i]) break;  // reached his match: no better woman left
            const auto r = wrank[j][i];
            if (r == 0) continue;  // she does not rank him (not a neighbor)
            if (husband_rank[j] == 0 || r < husband_rank[j]) return std::make_pair(i, j);
        }
    }
    return std::nullopt;
}

std::optional<std::pair<int, int>> find_blocking_pair(const Market& market,
                                                      const Matching& mu) {
    const int n_men = market.num_men();
    const int n_women = market.num_women();
    std::vector<std::int32_t> husband_rank(n_women, 0);
    for (int i = 0; i < n_men; ++i) {
        const auto j = mu.man_to_woman[i];
        if (j == Matching::kUnmatched) continue;
        const auto list = market.man_list(i);
        for (int s = 0; s < market.d; ++s)
            if (list[s] == j) {
                husband_rank[j] = market.w_rank_at[static_cast<std::size_t>(i) * market.d + s];
                break;
            }
    }
    for (int i = 0; i < n_men; ++i) {
        const auto match = mu.man_to_woman[i];
        const auto list = market.man_list(i);
        for (int s = 0; s < market.d; ++s) {
            const auto j = list[s];
            if (j == match) break;
            const auto r = market.w_rank_at[static_cast<std::size_t>(i) * market.d + s];
            if (husband_rank[j] == 0 || r < husband_rank[j]) return std::make_pair(i, j);
        }
    }
    return std::nullopt;
}

namespace {

struct Enumerator {
    const PrefLists& prefs;
    int n_men, n_women;
    std::vector<std::vector<std::int32_t>> mrank, wrank;  // 0 = not listed
    std::vector<std::int32_t> man_match, woman_match;
    std::vector<Matching> found;

    explicit Enumerator(const PrefLists& p)
        : prefs(p),
          n_men(static_cast<int>(p.men.size())),
          n_women(static_cast<int>(p.women.size())) {
        mrank.assign(n_men, std::vector<std::int32_t>(n_women, 0));
        for (int i = 0; i < n_men; ++i)
            for (int s = 0; s < static_cast<int>(p.men[i].size()); ++s)
                mrank[i][p.men[i][s]] = s + 1;
        wrank.assign(n_women, std::vector<std::int32_t>(n_men, 0));
        for (int j = 0; j < n_women; ++j)
            for (int s = 0; s < static_cast<int>(p.women[j].size()); ++s)
                wrank[j][p.women[j][s]] = s + 1;
        man_match.assign(n_men, Matching::kUnmatched);
        woman_match.assign(n_women, Matching::kUnmatched);
    }

    // A partial assignment of men 0..a dies as soon as it contains a pair
    // that can no longer be un-blocked: a man preferring a woman already
    // matched to someone she likes less. Pairs with still-unclaimed women
    // stay open until the leaf check.
    bool locally_blocked(int a) const {
        const int match_rank =
            man_match[a] == Matching::kUnmatched ? 0 : mrank[a][man_match[a]];
        for (const auto j : prefs.men[a]) {
            if (match_rank != 0 && mrank[a][j] >= match_rank) break;
            if (woman_match[j] == Matching::kUnmatched) continue;
            if (wrank[j][a] != 0 && wrank[j][a] < wrank[j][woman_match[j]]) return true;
        }
        const auto j = man_match[a];
        if (j != Matching::kUnmatched) {
            // Did claiming j create a blocking pair with an earlier man?
            for (const auto b : prefs.women[j]) {
                if (b == a) break;  // men she prefers to a, in her order
                if (b >= a || man_match[b] == j) continue;
                if (b < a) {
                    const int brank = man_match[b] == Matching::kUnmatched
                                          ? 0
                                          : mrank[b][man_match[b]];
                    if (mrank[b][j] != 0 && (brank == 0 || mrank[b][j] < brank)) return true;
                }
            }
        }
        return false;
    }

    void assign(int a) {
        if (a == n_men) {
            Matching mu;
            mu.man_to_woman = man_match;
            mu.woman_to_man = woman_match;
            if (!find_blocking_pair(prefs, mu)) found.push_back(std::move(mu));
            return;
        }
        // Unmatched branch first, then each adjacent free woman.
        if (!locally_blocked(a)) assign(a + 1);
        for (const auto j : prefs.men[a]) {
            if (woman_match[j] != Matching::kUnmatched) continue;
            man_match[a] = j;
            woman_match[j] = a;
            if (!locally_blocked(a)) assign(a + 1);
            man_match[a] = Matching::kUnmatched;
            woman_match[j] = Matching::kUnmatched;
        }
    }
};

}  // namespace

std::vector<Matching> enumerate_stable_matchings(const PrefLists& prefs) {
    if (prefs.men.size() > 10 || prefs.women.size() > 10)
        throw std::runtime_error(
            "enumerate_stable_matchings: exhaustive search is limited to 10 agents per side "
            "(got " +
            std::to_string(prefs.men.size()) + " men, " + std::to_string(prefs.women.size()) +
            " women)");
    Enumerator e(prefs);
    e.assign(0);
    return std::move(e.found);
}

std::vector<Matching> enumerate_stable_matchings(const Market& market) {
    return enumerate_stable_matchings(from_market(market));
}

std::vector<std::int64_t> balls_into_bins(std::int64_t balls, int bins, Rng& rng) {
    if (bins < 1) throw std::invalid_argument("balls_into_bins: bins must be >= 1");
    if (balls < 0) throw std::invalid_argument("balls_into_bins: balls must be >= 0");
    std::vector<std::int64_t> counts(bins, 0);
    for (std::int64_t t = 0; t < balls; ++t) ++counts[uniform_index(rng, bins)];
    return counts;
}

double reciprocal_sum_check(std::int64_t balls, int bins, int runs, Rng& rng) {
    if (balls < 1) throw std::invalid_argument("reciprocal_sum_check: balls must be >= 1");
    if (runs < 1) throw std::invalid_argument("reciprocal_sum_check: runs must be >= 1");
    double total = 0.0;
    for (int r = 0; r < runs; ++r) {
        const auto counts = balls_into_bins(balls, bins, rng);
        double s = 0.0;
        for (const auto w : counts) s += 1.0 / (w + 1);
        total += s / bins;
    }
    return total / runs;
}

double reciprocal_sum_reference(std::int64_t balls, int bins) {
    const double n = bins;
    const double t1 = static_cast<double>(balls) + 1.0;
    return (n / t1) * (1.0 - std::pow(1.0 - 1.0 / n, t1));
}

}  // namespace mm::oracle
