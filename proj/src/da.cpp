#include "matchmarket/da.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mm {

namespace {

// Sequential proposer-side DA over CSR preference lists. Proposers enter one
// at a time (entry_order, default ascending) and each rejection chain runs to
// completion before the next entry. recv_rank is aligned with prefs and
// holds the receiver's rank of the proposing side for that edge, so every
// accept/reject decision is O(1).
struct EngineOut {
    std::vector<std::int32_t> prop_to_recv;
    std::vector<std::int32_t> recv_to_prop;
    RunTrace trace;
};

EngineOut run_da_csr(const std::int32_t* offs, const std::int32_t* prefs,
                     const std::int32_t* recv_rank, int n_prop, int n_recv,
                     const TraceOptions& opts, const std::int32_t* entry_order = nullptr) {
    EngineOut out;
    out.prop_to_recv.assign(n_prop, Matching::kUnmatched);
    out.recv_to_prop.assign(n_recv, Matching::kUnmatched);
    RunTrace& tr = out.trace;
    tr.w_counts.assign(n_recv, 0);
    tr.m_counts.assign(n_prop, 0);
    tr.series_stride = std::max(1, opts.stride);

    std::vector<std::int32_t> held_rank(n_recv, 0);
    std::vector<std::int32_t> next(n_prop, 0);

    int delta_p = 0;       // proposers with exhausted lists, still unmatched
    int delta_r = n_recv;  // receivers who have not yet been proposed to
    std::int64_t t = 0;

    // Running sum of 1/(W_j + 1) over all receivers, for the ex-ante p_t.
    double recip_sum = static_cast<double>(n_recv);

    if (opts.record_series) {
        tr.delta_m_series.push_back(0);
        tr.delta_w_series.push_back(static_cast<std::int32_t>(n_recv));
    }
    auto record = [&] {
        if (opts.record_series && t % tr.series_stride == 0) {
            tr.delta_m_series.push_back(static_cast<std::int32_t>(delta_p));
            tr.delta_w_series.push_back(static_cast<std::int32_t>(delta_r));
        }
    };

    for (int enter = 0; enter < n_prop; ++enter) {
        int cur = entry_order ? entry_order[enter] : enter;
        while (cur >= 0) {
            const std::int32_t off = offs[cur];
            const std::int32_t len = offs[cur + 1] - off;
            if (next[cur] == len) {  // entered with an empty list (ragged input)
                ++delta_p;
                break;
            }
            if (opts.record_acceptance_prob) {
                double held_part = 0.0;
                for (int s = 0; s < next[cur]; ++s)
                    held_part += 1.0 / (tr.w_counts[prefs[off + s]] + 1);
                tr.acceptance_prob_series.push_back((recip_sum - held_part) /
                                                    (n_recv - next[cur]));
            }
            const int s = next[cur]++;
            const std::int32_t r = prefs[off + s];
            const std::int32_t rank = recv_rank[off + s];
            ++t;
            ++tr.m_counts[cur];
            if (opts.record_acceptance_prob) {
                const std::int32_t w = tr.w_counts[r];
                recip_sum += 1.0 / (w + 2) - 1.0 / (w + 1);
            }
            ++tr.w_counts[r];

            if (out.recv_to_prop[r] == Matching::kUnmatched) {
                // First proposal ever: she accepts and stays matched for good.
                --delta_r;
                out.recv_to_prop[r] = cur;
                held_rank[r] = rank;
                cur = -1;
            } else if (rank < held_rank[r]) {
                const std::int32_t bumped = out.recv_to_prop[r];
                out.recv_to_prop[r] = cur;
                held_rank[r] = rank;
                cur = bumped;
            }
            // else: rejected outright, cur proposes again.

            // A rejected proposer at the end of his list leaves the chain
            // before the next time tick; fold that into this step's record.
            // (cur may have changed: look up his own list length.)
            if (cur >= 0 && next[cur] == offs[cur + 1] - offs[cur]) {
                ++delta_p;
                cur = -1;
            }
            record();
        }
    }
    // Close the series at t = tau, folding in any trailing zero-proposal
    // events (empty-list entrants after the last proposal).
    if (opts.record_series) {
        if (t % tr.series_stride == 0) {
            tr.delta_m_series.back() = static_cast<std::int32_t>(delta_p);
            tr.delta_w_series.back() = static_cast<std::int32_t>(delta_r);
        } else {
            tr.delta_m_series.push_back(static_cast<std::int32_t>(delta_p));
            tr.delta_w_series.push_back(static_cast<std::int32_t>(delta_r));
        }
    }

    tr.tau = t;
    tr.delta_m = delta_p;
    tr.delta_w = delta_r;
    for (int r = 0; r < n_recv; ++r)
        if (out.recv_to_prop[r] != Matching::kUnmatched)
            out.prop_to_recv[out.recv_to_prop[r]] = r;
    return out;
}

std::vector<std::int32_t> stride_offsets(int count, int stride) {
    std::vector<std::int32_t> offs(count + 1);
    for (int i = 0; i <= count; ++i) offs[i] = i * stride;
    return offs;
}

}  // namespace

DAResult run_mosm(const Market& market, const TraceOptions& opts) {
    const auto offs = stride_offsets(market.num_men(), market.d);
    auto eng = run_da_csr(offs.data(), market.men_prefs.data(), market.w_rank_at.data(),
                          market.num_men(), market.n, opts);
    DAResult res;
    res.matching.man_to_woman = std::move(eng.prop_to_recv);
    res.matching.woman_to_man = std::move(eng.recv_to_prop);
    res.trace = std::move(eng.trace);
    return res;
}

DAResult run_wosm(const Market& market, const TraceOptions& opts) {
    auto eng = run_da_csr(market.w_off.data(), market.w_men.data(), market.m_rank_at.data(),
                          market.n, market.num_men(), opts);
    DAResult res;
    res.matching.woman_to_man = std::move(eng.prop_to_recv);
    res.matching.man_to_woman = std::move(eng.recv_to_prop);
    res.trace = std::move(eng.trace);
    return res;
}

int sample_woman_rank(int received, int degree, Rng& rng) {
    if (received < 1 || received > degree)
        throw std::invalid_argument("sample_woman_rank: need 1 <= received <= degree, got received=" +
                                    std::to_string(received) + " degree=" + std::to_string(degree));
    // Largest order statistic of `received` iid uniforms.
    const double v = std::pow(uniform01(rng), 1.0 / received);
    int rank = 1;
    for (int s = received; s < degree; ++s)
        if (uniform01(rng) > v) ++rank;
    return rank;
}

bool verify_order_independence(const Market& market,
                               std::span<const std::vector<std::int32_t>> orders) {
    const int men = market.num_men();
    for (const auto& order : orders) {
        if (static_cast<int>(order.size()) != men)
            throw std::invalid_argument("verify_order_independence: order has wrong length");
        std::vector<bool> seen(men, false);
        for (const auto i : order) {
            if (i < 0 || i >= men || seen[i])
                throw std::invalid_argument("verify_order_independence: not a permutation of men");
            seen[i] = true;
        }
    }
    const TraceOptions quiet{.record_series = false};
    const Matching baseline = run_mosm(market, quiet).matching;
    const auto offs = stride_offsets(men, market.d);
    for (const auto& order : orders) {
        auto eng = run_da_csr(offs.data(), market.men_prefs.data(), market.w_rank_at.data(), men,
                              market.n, quiet, order.data());
        if (eng.prop_to_recv != baseline.man_to_woman) return false;
    }
    return true;
}

// --- lazy engine -----------------------------------------------------------

namespace {

// Per-man record of where he has proposed so far. Membership is a linear
// scan (lists stay near sqrt(d) long in the regimes of interest); once a man
// has proposed to most women the complement is materialized instead so a
// near-complete lazy run cannot degenerate.
struct ProposalLog {
    std::vector<std::int32_t> proposed;
    std::vector<std::int32_t> complement;  // women not yet proposed to, once built

    bool contains(std::int32_t j) const {
        return std::find(proposed.begin(), proposed.end(), j) != proposed.end();
    }
};

std::int32_t draw_fresh_woman(ProposalLog& log, int n, Rng& rng, std::vector<std::uint8_t>& mark) {
    const int made = static_cast<int>(log.proposed.size());
    if (!log.complement.empty()) {
        const int idx = uniform_index(rng, static_cast<int>(log.complement.size()));
        const std::int32_t j = log.complement[idx];
        log.complement[idx] = log.complement.back();
        log.complement.pop_back();
        return j;
    }
    if (made * 4 >= n * 3) {
        // Heavily proposed: build the complement once and draw from it.
        for (const auto j : log.proposed) mark[j] = 1;
        log.complement.reserve(n - made);
        for (int j = 0; j < n; ++j)
            if (!mark[j]) log.complement.push_back(j);
        for (const auto j : log.proposed) mark[j] = 0;
        return draw_fresh_woman(log, n, rng, mark);
    }
    for (;;) {
        const std::int32_t j = static_cast<std::int32_t>(uniform_index(rng, n));
        if (!log.contains(j)) return j;
    }
}

}  // namespace

LazyDAResult run_mosm_lazy(const MarketConfig& cfg, Rng& rng, const TraceOptions& opts) {
    cfg.validate();
    const int men = cfg.num_men();
    const int n = cfg.n;
    const int d = cfg.d;

    LazyDAResult res;
    res.matching.man_to_woman.assign(men, Matching::kUnmatched);
    res.matching.woman_to_man.assign(n, Matching::kUnmatched);
    RunTrace& tr = res.trace;
    tr.w_counts.assign(n, 0);
    tr.m_counts.assign(men, 0);
    tr.series_stride = std::max(1, opts.stride);

    std::vector<ProposalLog> logs(men);
    std::vector<std::uint8_t> mark(n, 0);

    int delta_p = 0;
    int delta_r = n;
    std::int64_t t = 0;
    double recip_sum = static_cast<double>(n);

    if (opts.record_series) {
        tr.delta_m_series.push_back(0);
        tr.delta_w_series.push_back(static_cast<std::int32_t>(n));
    }
    auto record = [&] {
        if (opts.record_series && t % tr.series_stride == 0) {
            tr.delta_m_series.push_back(static_cast<std::int32_t>(delta_p));
            tr.delta_w_series.push_back(static_cast<std::int32_t>(delta_r));
        }
    };

    for (int enter = 0; enter < men; ++enter) {
        int cur = enter;
        while (cur >= 0) {
            ProposalLog& log = logs[cur];
            if (opts.record_acceptance_prob) {
                double held_part = 0.0;
                for (const auto j : log.proposed) held_part += 1.0 / (tr.w_counts[j] + 1);
                tr.acceptance_prob_series.push_back(
                    (recip_sum - held_part) / (n - static_cast<int>(log.proposed.size())));
            }
            const std::int32_t j = draw_fresh_woman(log, n, rng, mark);
            log.proposed.push_back(j);
            ++t;
            ++tr.m_counts[cur];
            const std::int32_t seen = tr.w_counts[j];
            if (opts.record_acceptance_prob)
                recip_sum += 1.0 / (seen + 2) - 1.0 / (seen + 1);
            ++tr.w_counts[j];

            if (res.matching.woman_to_man[j] == Matching::kUnmatched) {
                --delta_r;
                res.matching.woman_to_man[j] = cur;
                cur = -1;
            } else if (uniform01(rng) * (seen + 1) < 1.0) {
                // She prefers the newcomer with probability 1/(seen+1).
                const std::int32_t bumped = res.matching.woman_to_man[j];
                res.matching.woman_to_man[j] = cur;
                cur = bumped;
            }
            if (cur >= 0 && static_cast<int>(logs[cur].proposed.size()) == d) {
                ++delta_p;
                cur = -1;
            }
            record();
        }
    }
    if (opts.record_series && t % tr.series_stride != 0) {
        tr.delta_m_series.push_back(static_cast<std::int32_t>(delta_p));
        tr.delta_w_series.push_back(static_cast<std::int32_t>(delta_r));
    }

    tr.tau = t;
    tr.delta_m = delta_p;
    tr.delta_w = delta_r;
    for (int j = 0; j < n; ++j)
        if (res.matching.woman_to_man[j] != Matching::kUnmatched)
            res.matching.man_to_woman[res.matching.woman_to_man[j]] = j;

    // Reveal the untouched tail of every man's list: a uniform subset of the
    // women he never proposed to. Only per-woman totals matter, and they
    // determine each woman's realized degree.
    std::vector<std::int32_t> extra(n, 0);
    for (int i = 0; i < men; ++i) {
        ProposalLog& log = logs[i];
        int remaining = d - static_cast<int>(log.proposed.size());
        if (remaining == 0) continue;
        for (const auto j : log.proposed) mark[j] = 1;
        const int pool = n - static_cast<int>(log.proposed.size());
        if (remaining * 3 > pool) {
            std::vector<std::int32_t> comp;
            comp.reserve(pool);
            for (int j = 0; j < n; ++j)
                if (!mark[j]) comp.push_back(j);
            for (int s = 0; s < remaining; ++s) {
                const int q = s + uniform_index(rng, pool - s);
                std::swap(comp[s], comp[q]);
                ++extra[comp[s]];
            }
        } else {
            int drawn = 0;
            while (drawn < remaining) {
                const std::int32_t j = static_cast<std::int32_t>(uniform_index(rng, n));
                if (mark[j]) continue;
                mark[j] = 1;
                log.proposed.push_back(j);  // so the unmark pass sees it
                ++extra[j];
                ++drawn;
            }
        }
        for (const auto j : log.proposed) mark[j] = 0;
    }

    res.woman_degree.resize(n);
    res.woman_rank.assign(n, 0);
    for (int j = 0; j < n; ++j) {
        const int received = tr.w_counts[j];
        res.woman_degree[j] = received + extra[j];
        if (received > 0) res.woman_rank[j] = sample_woman_rank(received, res.woman_degree[j], rng);
    }
    return res;
}

LazyDAResult run_mosm_lazy(const MarketConfig& cfg, const TraceOptions& opts) {
    Rng rng = make_rng(cfg.seed);
    return run_mosm_lazy(cfg, rng, opts);
}

}  // namespace mm
