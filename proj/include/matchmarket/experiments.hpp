// Monte Carlo harness: replication management with deterministic parallel
// seeding, degree/imbalance sweeps, bisection threshold search and tabular
// output. Results are byte-identical for a given master seed regardless of
// the worker count.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "matchmarket/market.hpp"

namespace mm {

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    double p10 = 0.0;     // nearest-rank percentiles over replications
    double p90 = 0.0;
    int count = 0;
};

// Per-metric summaries in a fixed order: r_men, r_women, delta_m, delta_w,
// tau, components (eager engine only), then r_men_wosm/r_women_wosm when the
// WOSM pass is enabled and r_men_norm for imbalance sweeps.
struct SummaryStats {
    std::vector<std::pair<std::string, MetricSummary>> metrics;
    int reps = 0;

    const MetricSummary* find(const std::string& name) const;
};

struct RepOptions {
    bool lazy = false;          // use the coin-flipping engine
    bool include_wosm = false;  // additionally run woman-proposing DA
    bool components = true;     // count connected components (eager only)
    bool normalized_rank = false;  // add r_men_norm = r_men / d
    int workers = 0;            // 0 = hardware concurrency
    std::uint64_t cell = 0;     // seed domain separation across sweep cells
};

// Replication r draws its market from derive_seed(master_seed, cell, r).
SummaryStats run_replications(const MarketConfig& cfg, int reps, std::uint64_t master_seed,
                              const RepOptions& opts = {});

// --- tables ------------------------------------------------------------

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

enum class TableFormat { csv, json };

// Deterministic column order; floats with 6 significant digits. I/O errors
// surface as std::runtime_error carrying the path.
void emit_table(const Table& table, const std::string& path, TableFormat format);
std::string render_table(const Table& table, TableFormat format);
Table read_table_json(const std::string& path);

// One row per (d, metric): n,k,d,reps,metric,mean,std,p10,p90.
Table sweep_degree(int n, int k, const std::vector<int>& d_values, int reps,
                   std::uint64_t master_seed, const RepOptions& opts = {});

// Same schema over k in [k_lo, k_hi]; includes the normalized metric
// r_men_norm = r_men / d used by the imbalance figure.
Table sweep_imbalance(int n, int d, int k_lo, int k_hi, int reps,
                      std::uint64_t master_seed, const RepOptions& opts = {});

// --- phase-threshold search ---------------------------------------------

enum class ThresholdKind { rank_gap, unmatched_men, connectivity };

// Markets probed at (n women, n-1 men): the rank-gap threshold is the
// smallest d with E[r_women]/E[r_men] >= target (1.15), the unmatched-men
// threshold the smallest d with E[delta_m] <= 0.5, and the connectivity
// threshold the smallest d with E[#components] <= 2.
struct ThresholdSpec {
    ThresholdKind kind = ThresholdKind::rank_gap;
    double target = 0.0;  // 0 = the kind's default (1.15 / 0.5 / 2)
    int n = 0;
    int reps = 0;
    int d_lo = 1;
    int d_hi = 0;  // 0 = n
    int workers = 0;

    double effective_target() const;
};

struct ThresholdResult {
    int d_star = 0;
    int probes = 0;
    std::map<int, double> probe_estimates;  // d -> Monte Carlo estimate
};

// Integer bisection; each probed d is evaluated once (cached) with
// spec.reps replications. Throws std::runtime_error with both endpoint
// estimates if the predicate is not bracketed by [d_lo, d_hi].
ThresholdResult find_threshold(const ThresholdSpec& spec, std::uint64_t master_seed);

Table threshold_table(const ThresholdSpec& spec, const ThresholdResult& result);

}  // namespace mm
