#include "matchmarket/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "matchmarket/da.hpp"
#include "matchmarket/stats.hpp"

namespace mm {

namespace {

// Static summaries of one metric across replications, in replication order.
MetricSummary summarize_metric(const std::vector<double>& values) {
    MetricSummary s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (const auto v : values) sum += v;
    s.mean = sum / s.count;
    double ss = 0.0;
    for (const auto v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    auto nearest_rank = [&](double p) {
        const int idx = std::max<int>(1, static_cast<int>(std::ceil(p / 100.0 * s.count)));
        return sorted[idx - 1];
    };
    s.p10 = nearest_rank(10.0);
    s.p90 = nearest_rank(90.0);
    return s;
}

// Index-addressed parallel loop; output determinism is the caller's job
// (every task writes only its own slot).
void parallel_for(int count, int workers, const std::function<void(int)>& body) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= count) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

struct RepMetrics {
    double r_men = 0, r_women = 0, delta_m = 0, delta_w = 0, tau = 0;
    double components = 0;
    double r_men_wosm = 0, r_women_wosm = 0;
};

}  // namespace

const MetricSummary* SummaryStats::find(const std::string& name) const {
    for (const auto& [n, s] : metrics)
        if (n == name) return &s;
    return nullptr;
}

SummaryStats run_replications(const MarketConfig& cfg, int reps, std::uint64_t master_seed,
                              const RepOptions& opts) {
    cfg.validate();
    if (reps < 1) throw std::invalid_argument("run_replications: reps must be >= 1");

    const TraceOptions quiet{.record_series = false};
    std::vector<RepMetrics> rep(reps);
    parallel_for(reps, opts.workers, [&](int r) {
        MarketConfig c = cfg;
        c.seed = derive_seed(master_seed, opts.cell, static_cast<std::uint64_t>(r));
        RepMetrics& m = rep[r];
        if (opts.lazy) {
            const auto res = run_mosm_lazy(c, quiet);
            const auto s = summarize(res, c);
            m.r_men = s.r_men;
            m.r_women = s.r_women;
            m.delta_m = s.delta_m;
            m.delta_w = s.delta_w;
            m.tau = static_cast<double>(res.trace.tau);
        } else {
            const auto market = generate_market(c);
            const auto res = run_mosm(market, quiet);
            const auto s = summarize(market, res.matching);
            m.r_men = s.r_men;
            m.r_women = s.r_women;
            m.delta_m = s.delta_m;
            m.delta_w = s.delta_w;
            m.tau = static_cast<double>(res.trace.tau);
            if (opts.components) m.components = count_components(market);
            if (opts.include_wosm) {
                const auto ws = summarize(market, run_wosm(market, quiet).matching);
                m.r_men_wosm = ws.r_men;
                m.r_women_wosm = ws.r_women;
            }
        }
    });

    SummaryStats out;
    out.reps = reps;
    auto add = [&](const std::string& name, double RepMetrics::*field) {
        std::vector<double> v(reps);
        for (int r = 0; r < reps; ++r) v[r] = rep[r].*field;
        out.metrics.emplace_back(name, summarize_metric(v));
    };
    add("r_men", &RepMetrics::r_men);
    add("r_women", &RepMetrics::r_women);
    add("delta_m", &RepMetrics::delta_m);
    add("delta_w", &RepMetrics::delta_w);
    add("tau", &RepMetrics::tau);
    if (!opts.lazy && opts.components) add("components", &RepMetrics::components);
    if (!opts.lazy && opts.include_wosm) {
        add("r_men_wosm", &RepMetrics::r_men_wosm);
        add("r_women_wosm", &RepMetrics::r_women_wosm);
    }
    if (opts.normalized_rank) {
        std::vector<double> v(reps);
        for (int r = 0; r < reps; ++r) v[r] = rep[r].r_men / cfg.d;
        out.metrics.emplace_back("r_men_norm", summarize_metric(v));
    }
    return out;
}

// --- tables ------------------------------------------------------------

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string cell_text(const Cell& c) {
    if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
    if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
    return std::get<std::string>(c);
}

}  // namespace

std::string render_table(const Table& table, TableFormat format) {
    std::ostringstream out;
    if (format == TableFormat::csv) {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            out << (c ? "," : "") << csv_escape(table.columns[c]);
        out << '\n';
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << csv_escape(cell_text(row[c]));
            out << '\n';
        }
        return out.str();
    }
    out << "{\n  \"columns\": [";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? ", " : "") << '"' << json_escape(table.columns[c]) << '"';
    out << "],\n  \"rows\": [";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << (r ? ",\n    {" : "\n    {");
        const auto& row = table.rows[r];
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? ", " : "") << '"' << json_escape(table.columns[c]) << "\": ";
            if (std::holds_alternative<std::string>(row[c]))
                out << '"' << json_escape(std::get<std::string>(row[c])) << '"';
            else
                out << cell_text(row[c]);
        }
        out << '}';
    }
    out << (table.rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
    return out.str();
}

void emit_table(const Table& table, const std::string& path, TableFormat format) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_table: cannot open '" + path + "' for writing");
    f << render_table(table, format);
    if (!f) throw std::runtime_error("emit_table: write failed for '" + path + "'");
}

Table read_table_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_table_json: cannot open '" + path + "'");
    nlohmann::json j;
    f >> j;
    Table t;
    for (const auto& c : j.at("columns")) t.columns.push_back(c.get<std::string>());
    for (const auto& row : j.at("rows")) {
        std::vector<Cell> cells;
        for (const auto& col : t.columns) {
            const auto& v = row.at(col);
            if (v.is_number_integer())
                cells.emplace_back(v.get<std::int64_t>());
            else if (v.is_number())
                cells.emplace_back(v.get<double>());
            else
                cells.emplace_back(v.get<std::string>());
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

namespace {

const std::vector<std::string> kSweepColumns = {"n",    "k",    "d",   "reps", "metric",
                                                "mean", "std",  "p10", "p90"};

void append_stats_rows(Table& table, int n, int k, int d, int reps, const SummaryStats& stats) {
    for (const auto& [name, s] : stats.metrics)
        table.rows.push_back({static_cast<std::int64_t>(n), static_cast<std::int64_t>(k),
                              static_cast<std::int64_t>(d), static_cast<std::int64_t>(reps), name,
                              s.mean, s.stddev, s.p10, s.p90});
}

}  // namespace

Table sweep_degree(int n, int k, const std::vector<int>& d_values, int reps,
                   std::uint64_t master_seed, const RepOptions& opts) {
    Table table;
    table.columns = kSweepColumns;
    RepOptions cell_opts = opts;
    for (std::size_t i = 0; i < d_values.size(); ++i) {
        cell_opts.cell = i;
        const MarketConfig cfg{.n = n, .k = k, .d = d_values[i], .seed = 0};
        append_stats_rows(table, n, k, d_values[i], reps,
                          run_replications(cfg, reps, master_seed, cell_opts));
    }
    return table;
}

Table sweep_imbalance(int n, int d, int k_lo, int k_hi, int reps, std::uint64_t master_seed,
                      const RepOptions& opts) {
    if (k_lo > k_hi) throw std::invalid_argument("sweep_imbalance: k_lo must be <= k_hi");
    if (n + k_lo < 1) throw std::invalid_argument("sweep_imbalance: need n + k >= 1 across the range");
    Table table;
    table.columns = kSweepColumns;
    RepOptions cell_opts = opts;
    cell_opts.normalized_rank = true;
    for (int k = k_lo; k <= k_hi; ++k) {
        cell_opts.cell = static_cast<std::uint64_t>(k - k_lo);
        const MarketConfig cfg{.n = n, .k = k, .d = d, .seed = 0};
        append_stats_rows(table, n, k, d, reps, run_replications(cfg, reps, master_seed, cell_opts));
    }
    return table;
}

// --- phase-threshold search ---------------------------------------------

double ThresholdSpec::effective_target() const {
    if (target > 0.0) return target;
    switch (kind) {
        case ThresholdKind::rank_gap: return 1.15;
        case ThresholdKind::unmatched_men: return 0.5;
        case ThresholdKind::connectivity: return 2.0;
    }
    return 0.0;
}

ThresholdResult find_threshold(const ThresholdSpec& spec, std::uint64_t master_seed) {
    if (spec.n < 2) throw std::invalid_argument("find_threshold: need n >= 2");
    if (spec.reps < 1) throw std::invalid_argument("find_threshold: reps must be >= 1");
    const int d_hi = spec.d_hi > 0 ? spec.d_hi : spec.n;
    if (spec.d_lo < 1 || spec.d_lo >= d_hi || d_hi > spec.n)
        throw std::invalid_argument("find_threshold: need 1 <= d_lo < d_hi <= n");
    const double target = spec.effective_target();

    ThresholdResult result;
    RepOptions opts;
    opts.workers = spec.workers;
    opts.components = (spec.kind == ThresholdKind::connectivity);

    // Markets probed with one woman in excess (n women, n-1 men). Each d is
    // evaluated Monte Carlo once; near the threshold the measures change
    // rapidly, so a single probe at full reps resolves the predicate.
    auto estimate = [&](int d) {
        const auto it = result.probe_estimates.find(d);
        if (it != result.probe_estimates.end()) return it->second;
        RepOptions probe_opts = opts;
        probe_opts.cell = static_cast<std::uint64_t>(d);
        const MarketConfig cfg{.n = spec.n, .k = -1, .d = d, .seed = 0};
        const auto stats = run_replications(cfg, spec.reps, master_seed, probe_opts);
        double est = 0.0;
        switch (spec.kind) {
            case ThresholdKind::rank_gap:
                est = stats.find("r_women")->mean / stats.find("r_men")->mean;
                break;
            case ThresholdKind::unmatched_men:
                est = stats.find("delta_m")->mean;
                break;
            case ThresholdKind::connectivity:
                est = stats.find("components")->mean;
                break;
        }
        result.probe_estimates.emplace(d, est);
        ++result.probes;
        return est;
    };
    auto predicate = [&](int d) {
        const double est = estimate(d);
        return spec.kind == ThresholdKind::rank_gap ? est >= target : est <= target;
    };

    if (predicate(spec.d_lo))
        throw std::runtime_error("find_threshold: predicate already holds at d_lo=" +
                                 std::to_string(spec.d_lo) +
                                 " (estimate " + std::to_string(estimate(spec.d_lo)) +
                                 "); estimate at d_hi=" + std::to_string(d_hi) + " is " +
                                 std::to_string(estimate(d_hi)));
    if (!predicate(d_hi))
        throw std::runtime_error("find_threshold: predicate does not hold at d_hi=" +
                                 std::to_string(d_hi) + " (estimate " +
                                 std::to_string(estimate(d_hi)) + "); estimate at d_lo=" +
                                 std::to_string(spec.d_lo) + " is " +
                                 std::to_string(estimate(spec.d_lo)));

    int lo = spec.d_lo, hi = d_hi;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (predicate(mid))
            hi = mid;
        else
            lo = mid;
    }
    result.d_star = hi;
    return result;
}

Table threshold_table(const ThresholdSpec& spec, const ThresholdResult& result) {
    Table t;
    t.columns = {"kind", "n", "reps", "d_star", "probes"};
    const char* kind_name = spec.kind == ThresholdKind::rank_gap      ? "rank_gap"
                            : spec.kind == ThresholdKind::unmatched_men ? "unmatched_men"
                                                                        : "connectivity";
    t.rows.push_back({std::string(kind_name), static_cast<std::int64_t>(spec.n),
                      static_cast<std::int64_t>(spec.reps), static_cast<std::int64_t>(result.d_star),
                      static_cast<std::int64_t>(result.probes)});
    return t;
}

}  // namespace mm
