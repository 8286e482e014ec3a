#include "matchmarket/market.hpp"

#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace mm {

void MarketConfig::validate() const {
    if (n < 1) throw std::invalid_argument("market config: n must be >= 1, got " + std::to_string(n));
    if (d < 1 || d > n)
        throw std::invalid_argument("market config: d must satisfy 1 <= d <= n, got d=" +
                                    std::to_string(d) + " with n=" + std::to_string(n));
    if (n + k < 0)
        throw std::invalid_argument("market config: n + k must be >= 0, got k=" + std::to_string(k));
}

int Market::rank_of_woman(int i, int j) const {
    const auto list = man_list(i);
    for (int s = 0; s < d; ++s)
        if (list[s] == j) return s + 1;
    return 0;
}

int Market::rank_of_man(int j, int i) const {
    const auto list = woman_list(j);
    for (int p = 0; p < static_cast<int>(list.size()); ++p)
        if (list[p] == i) return p + 1;
    return 0;
}

std::vector<std::int32_t> sample_d_subset(int n, int d, Rng& rng) {
    if (n < 1 || d < 1 || d > n)
        throw std::invalid_argument("sample_d_subset: need 1 <= d <= n, got d=" + std::to_string(d) +
                                    " n=" + std::to_string(n));
    std::vector<std::int32_t> out(d);
    // Both branches perform the identical partial Fisher-Yates walk (same rng
    // consumption, same output); the map variant just avoids the O(n) array.
    if (d * 8 >= n) {
        std::vector<std::int32_t> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < d; ++i) {
            const int j = i + uniform_index(rng, n - i);
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
    } else {
        std::unordered_map<int, std::int32_t> displaced;
        displaced.reserve(static_cast<std::size_t>(d) * 2);
        auto value_at = [&](int idx) {
            const auto it = displaced.find(idx);
            return it == displaced.end() ? static_cast<std::int32_t>(idx) : it->second;
        };
        for (int i = 0; i < d; ++i) {
            const int j = i + uniform_index(rng, n - i);
            const std::int32_t vi = value_at(i);
            const std::int32_t vj = value_at(j);
            out[i] = vj;
            displaced[j] = vi;
        }
    }
    return out;
}

Market generate_market(const MarketConfig& cfg, Rng& rng) {
    cfg.validate();
    Market m;
    m.n = cfg.n;
    m.k = cfg.k;
    m.d = cfg.d;
    const int men = cfg.num_men();
    const std::size_t edges = static_cast<std::size_t>(men) * cfg.d;

    m.men_prefs.resize(edges);
    for (int i = 0; i < men; ++i) {
        const auto list = sample_d_subset(cfg.n, cfg.d, rng);
        std::copy(list.begin(), list.end(), m.men_prefs.begin() + static_cast<std::size_t>(i) * cfg.d);
    }

    // Bucket the edges by woman, keeping each edge's slot in the man's list.
    m.w_off.assign(cfg.n + 1, 0);
    for (const auto j : m.men_prefs) ++m.w_off[j + 1];
    for (int j = 0; j < cfg.n; ++j) m.w_off[j + 1] += m.w_off[j];

    m.w_men.resize(edges);
    m.m_rank_at.resize(edges);
    {
        std::vector<std::int32_t> cursor(m.w_off.begin(), m.w_off.end() - 1);
        for (int i = 0; i < men; ++i)
            for (int s = 0; s < cfg.d; ++s) {
                const std::int32_t j = m.men_prefs[static_cast<std::size_t>(i) * cfg.d + s];
                const std::int32_t pos = cursor[j]++;
                m.w_men[pos] = i;
                m.m_rank_at[pos] = s + 1;
            }
    }

    // Each woman's priority is a uniform permutation of her neighbor set.
    for (int j = 0; j < cfg.n; ++j) {
        const int off = m.w_off[j];
        const int deg = m.w_off[j + 1] - off;
        for (int p = 0; p < deg - 1; ++p) {
            const int q = p + uniform_index(rng, deg - p);
            std::swap(m.w_men[off + p], m.w_men[off + q]);
            std::swap(m.m_rank_at[off + p], m.m_rank_at[off + q]);
        }
    }

    m.w_rank_at.resize(edges);
    for (int j = 0; j < cfg.n; ++j)
        for (int p = m.w_off[j]; p < m.w_off[j + 1]; ++p) {
            const std::int32_t i = m.w_men[p];
            const std::int32_t s = m.m_rank_at[p] - 1;
            m.w_rank_at[static_cast<std::size_t>(i) * cfg.d + s] = p - m.w_off[j] + 1;
        }
    return m;
}

Market generate_market(const MarketConfig& cfg) {
    Rng rng = make_rng(cfg.seed);
    return generate_market(cfg, rng);
}

}  // namespace mm
