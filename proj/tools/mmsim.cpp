// mmsim: random matching market simulator.
//
// Subcommands: simulate, sweep-degree, sweep-imbalance, threshold, hopstats,
// counterfactual, oracle-check. Every randomized command requires --seed and
// a given command line always produces byte-identical output files.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "matchmarket/counterfactual.hpp"
#include "matchmarket/da.hpp"
#include "matchmarket/experiments.hpp"
#include "matchmarket/oracle.hpp"
#include "matchmarket/stats.hpp"

namespace {

using namespace mm;

TableFormat parse_format(const std::string& name) {
    if (name == "csv") return TableFormat::csv;
    if (name == "json") return TableFormat::json;
    throw std::invalid_argument("unknown format '" + name + "' (expected csv or json)");
}

void write_or_print(const Table& table, const std::string& out, const std::string& format) {
    const auto fmt = parse_format(format);
    if (out.empty())
        std::cout << render_table(table, fmt);
    else
        emit_table(table, out, fmt);
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::string cur;
    for (const char c : text + ",") {
        if (c == ',') {
            if (cur.empty()) continue;
            try {
                out.push_back(std::stoi(cur));
            } catch (const std::exception&) {
                throw std::invalid_argument(std::string("cannot parse ") + what + " entry '" + cur + "'");
            }
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

struct CommonArgs {
    int n = 0, k = 0, d = 0, reps = 500, workers = 0;
    std::uint64_t seed = 0;
    std::string out, format = "csv";
    bool lazy = false, wosm = false;
};

void add_market_flags(CLI::App* cmd, CommonArgs& a, bool with_d = true) {
    cmd->add_option("--n", a.n, "number of women")->required();
    cmd->add_option("--k", a.k, "imbalance: men = n + k");
    if (with_d) cmd->add_option("--d", a.d, "length of each man's preference list")->required();
    cmd->add_option("--reps", a.reps, "replications per cell");
    cmd->add_option("--seed", a.seed, "master seed (required for reproducibility)")->required();
    cmd->add_option("--out", a.out, "output file (stdout if omitted)");
    cmd->add_option("--format", a.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--workers", a.workers, "worker threads (0 = hardware)");
}

int cmd_simulate(const CommonArgs& a, const std::string& trace_path, int trace_stride,
                 bool record_pt) {
    const MarketConfig cfg{.n = a.n, .k = a.k, .d = a.d, .seed = 0};
    cfg.validate();
    RepOptions opts;
    opts.lazy = a.lazy;
    opts.include_wosm = a.wosm && !a.lazy;
    opts.workers = a.workers;
    const auto stats = run_replications(cfg, a.reps, a.seed, opts);

    Table table;
    table.columns = {"n", "k", "d", "reps", "metric", "mean", "std", "p10", "p90"};
    for (const auto& [name, s] : stats.metrics)
        table.rows.push_back({static_cast<std::int64_t>(a.n), static_cast<std::int64_t>(a.k),
                              static_cast<std::int64_t>(a.d), static_cast<std::int64_t>(a.reps),
                              name, s.mean, s.stddev, s.p10, s.p90});
    write_or_print(table, a.out, a.format);

    if (!trace_path.empty()) {
        // Full trajectory of replication 0.
        MarketConfig c0 = cfg;
        c0.seed = derive_seed(a.seed, 0, 0);
        TraceOptions topts;
        topts.stride = trace_stride;
        topts.record_acceptance_prob = record_pt;
        RunTrace trace;
        if (a.lazy)
            trace = run_mosm_lazy(c0, topts).trace;
        else
            trace = run_mosm(generate_market(c0), topts).trace;
        Table tt;
        tt.columns = {"t", "delta_m", "delta_w"};
        if (record_pt) tt.columns.push_back("p_t");
        for (std::size_t s = 0; s < trace.delta_m_series.size(); ++s) {
            const std::int64_t t =
                std::min<std::int64_t>(static_cast<std::int64_t>(s) * trace.series_stride, trace.tau);
            std::vector<Cell> row{t, static_cast<std::int64_t>(trace.delta_m_series[s]),
                                  static_cast<std::int64_t>(trace.delta_w_series[s])};
            if (record_pt)
                row.emplace_back(t >= 1 && t <= static_cast<std::int64_t>(trace.acceptance_prob_series.size())
                                     ? trace.acceptance_prob_series[t - 1]
                                     : 0.0);
            tt.rows.push_back(std::move(row));
        }
        emit_table(tt, trace_path, TableFormat::csv);
    }

    std::printf("simulate n=%d k=%d d=%d reps=%d engine=%s:", a.n, a.k, a.d, a.reps,
                a.lazy ? "lazy" : "eager");
    for (const auto& [name, s] : stats.metrics) std::printf(" %s=%.6g", name.c_str(), s.mean);
    std::printf("\n");
    return 0;
}

int cmd_hopstats(const CommonArgs& a, int sample, int max_hops) {
    const MarketConfig cfg{.n = a.n, .k = a.k, .d = a.d, .seed = 0};
    cfg.validate();
    std::vector<double> sums(max_hops, 0.0);
    for (int r = 0; r < a.reps; ++r) {
        MarketConfig c = cfg;
        c.seed = derive_seed(a.seed, 0, r);
        const auto market = generate_market(c);
        Rng rng = make_rng(derive_seed(a.seed, 1, r));
        const int eff_sample = sample == 0 ? market.num_men() : sample;
        const auto f = hop_fractions(market, eff_sample, max_hops, rng);
        for (int h = 0; h < max_hops; ++h) sums[h] += f[h];
    }
    Table table;
    table.columns = {"n", "k", "d", "reps", "hop", "fraction"};
    std::printf("hopstats n=%d k=%d d=%d reps=%d:", a.n, a.k, a.d, a.reps);
    for (int h = 0; h < max_hops; ++h) {
        const double frac = sums[h] / a.reps;
        table.rows.push_back({static_cast<std::int64_t>(a.n), static_cast<std::int64_t>(a.k),
                              static_cast<std::int64_t>(a.d), static_cast<std::int64_t>(a.reps),
                              static_cast<std::int64_t>(h + 1), frac});
        std::printf(" within-%d=%.4f", h + 1, frac);
    }
    std::printf("\n");
    write_or_print(table, a.out, a.format);
    return 0;
}

int cmd_counterfactual(const std::string& roster_path, const std::string& programs_path,
                       const std::vector<int>& deltas, int reps, bool randomize,
                       const std::string& ks_text, std::uint64_t seed, const std::string& out,
                       const std::string& format) {
    const auto programs = school::load_programs(programs_path);
    const auto base = school::load_roster(roster_path, programs);
    const auto ks = parse_int_list(ks_text, "--ks");
    if (ks.empty()) throw std::invalid_argument("--ks must name at least one k");

    Table table;
    table.columns = {"delta", "seed", "randomized"};
    for (const auto k : ks) table.columns.push_back("top" + std::to_string(k));
    table.columns.push_back("unassigned");

    for (std::size_t di = 0; di < deltas.size(); ++di) {
        for (int r = 0; r < reps; ++r) {
            const std::uint64_t cell_seed = derive_seed(seed, di, r);
            auto roster = school::perturb_population(base, deltas[di], derive_seed(cell_seed, 1, 0));
            if (randomize)
                roster = school::randomize_preferences(roster, programs.size(),
                                                       derive_seed(cell_seed, 2, 0));
            const auto prio = school::apply_single_tiebreak(roster, programs,
                                                            derive_seed(cell_seed, 3, 0));
            const auto assignment = school::run_student_da(roster, programs, prio);
            const auto summary = school::summarize_assignment(assignment, roster, ks);
            std::vector<Cell> row{static_cast<std::int64_t>(deltas[di]), std::to_string(cell_seed),
                                  static_cast<std::int64_t>(randomize ? 1 : 0)};
            for (const auto& [k, frac] : summary.top_k) row.emplace_back(frac);
            row.emplace_back(summary.unassigned);
            table.rows.push_back(std::move(row));
        }
    }
    write_or_print(table, out, format);
    std::printf("counterfactual: %zu deltas x %d reps on %d students, %d programs\n", deltas.size(),
                reps, base.size(), programs.size());
    return 0;
}

int cmd_oracle_check(int instances, std::uint64_t seed, int max_n, int max_absk) {
    Rng rng = make_rng(seed);
    int checked = 0;
    for (int it = 0; it < instances; ++it) {
        const int n = 1 + uniform_index(rng, max_n);
        int k = -max_absk + uniform_index(rng, 2 * max_absk + 1);
        if (n + k < 0) k = -n;
        const int d = 1 + uniform_index(rng, n);
        const MarketConfig cfg{.n = n, .k = k, .d = d, .seed = rng()};
        const auto market = generate_market(cfg);
        const auto mosm = run_mosm(market).matching;
        const auto wosm = run_wosm(market).matching;
        if (oracle::find_blocking_pair(market, mosm) || oracle::find_blocking_pair(market, wosm))
            throw std::runtime_error("oracle-check: DA produced an unstable matching");
        const auto all = oracle::enumerate_stable_matchings(market);
        if (all.empty()) throw std::runtime_error("oracle-check: no stable matching found");
        bool saw_mosm = false, saw_wosm = false;
        for (const auto& mu : all) {
            saw_mosm |= (mu == mosm);
            saw_wosm |= (mu == wosm);
            for (int i = 0; i < market.num_men(); ++i)
                if ((mu.man_to_woman[i] == Matching::kUnmatched) !=
                    (mosm.man_to_woman[i] == Matching::kUnmatched))
                    throw std::runtime_error("oracle-check: unmatched set differs across stable matchings");
        }
        if (!saw_mosm || !saw_wosm)
            throw std::runtime_error("oracle-check: DA output missing from enumerated stable set");
        ++checked;
    }
    std::printf("oracle-check: %d instances verified (MOSM/WOSM in stable set, rural hospital holds)\n",
                checked);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random matching market simulator"};
    app.require_subcommand(1);

    CommonArgs sim_args;
    std::string trace_path;
    int trace_stride = 1;
    bool record_pt = false;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo summary of one market configuration");
    add_market_flags(sim, sim_args);
    sim->add_flag("--lazy", sim_args.lazy,
                  "coin-flipping engine (suggested when n*sqrt(d) exceeds ~1e7 proposals)");
    sim->add_flag("--wosm", sim_args.wosm, "also run woman-proposing DA for the rank-gap report");
    sim->add_option("--record-trace", trace_path, "write replication 0's delta trajectories to this CSV");
    sim->add_option("--trace-stride", trace_stride, "record every s-th proposal in the trace");
    sim->add_flag("--record-pt", record_pt, "include the ex-ante acceptance probability in the trace");

    CommonArgs sd_args;
    std::string d_list;
    int d_from = 0, d_to = 0, d_step = 1;
    auto* sd = app.add_subcommand("sweep-degree", "one summary row per degree d");
    add_market_flags(sd, sd_args, /*with_d=*/false);
    sd->add_flag("--lazy", sd_args.lazy, "coin-flipping engine");
    sd->add_flag("--wosm", sd_args.wosm, "also aggregate WOSM ranks");
    sd->add_option("--d-list", d_list, "comma-separated degrees, e.g. 5,10,20");
    sd->add_option("--d-from", d_from, "first degree of an arithmetic sweep");
    sd->add_option("--d-to", d_to, "last degree (inclusive)");
    sd->add_option("--d-step", d_step, "degree increment");

    CommonArgs si_args;
    int k_from = 0, k_to = 0;
    auto* si = app.add_subcommand("sweep-imbalance", "normalized rank across the imbalance range");
    add_market_flags(si, si_args);
    si->add_option("--k-from", k_from, "first imbalance")->required();
    si->add_option("--k-to", k_to, "last imbalance (inclusive)")->required();

    std::string th_kind;
    CommonArgs th_args;
    int th_dlo = 1, th_dhi = 0;
    double th_target = 0.0;
    auto* th = app.add_subcommand("threshold", "bisection search for a phase-transition degree");
    th->add_option("--kind", th_kind, "rank-gap | unmatched-men | connectivity")
        ->required()
        ->check(CLI::IsMember({"rank-gap", "unmatched-men", "connectivity"}));
    th->add_option("--n", th_args.n, "number of women (men = n - 1)")->required();
    th->add_option("--reps", th_args.reps, "replications per probed degree");
    th->add_option("--seed", th_args.seed, "master seed")->required();
    th->add_option("--d-lo", th_dlo, "lower search bound");
    th->add_option("--d-hi", th_dhi, "upper search bound (0 = n)");
    th->add_option("--target", th_target, "override the criterion target");
    th->add_option("--out", th_args.out, "output file (stdout if omitted)");
    th->add_option("--format", th_args.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    th->add_option("--workers", th_args.workers, "worker threads");

    CommonArgs hop_args;
    int hop_sample = 0, hop_max = 3;
    auto* hop = app.add_subcommand("hopstats", "man-man hop-distance fractions");
    add_market_flags(hop, hop_args);
    hop->add_option("--sample", hop_sample, "BFS sources per market (0 = all men)");
    hop->add_option("--max-hops", hop_max, "largest hop distance reported");

    std::string cf_roster, cf_programs, cf_ks = "1,3", cf_out, cf_format = "csv";
    std::vector<int> cf_deltas{0};
    int cf_reps = 1;
    bool cf_randomize = false;
    std::uint64_t cf_seed = 0;
    auto* cf = app.add_subcommand("counterfactual", "school-choice population counterfactuals");
    cf->add_option("--roster", cf_roster, "student preference CSV")->required();
    cf->add_option("--programs", cf_programs, "program capacity CSV")->required();
    cf->add_option("--delta", cf_deltas, "students to drop (<0) or duplicate (>0)")->delimiter(',');
    cf->add_option("--reps", cf_reps, "random realizations per delta");
    cf->add_flag("--randomize", cf_randomize, "popularity-weighted preference randomization");
    cf->add_option("--ks", cf_ks, "top-k cutoffs, e.g. 1,3");
    cf->add_option("--seed", cf_seed, "master seed")->required();
    cf->add_option("--out", cf_out, "output file (stdout if omitted)");
    cf->add_option("--format", cf_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    int oc_instances = 500, oc_max_n = 5, oc_max_absk = 2;
    std::uint64_t oc_seed = 0;
    auto* oc = app.add_subcommand("oracle-check", "brute-force verification on small markets");
    oc->add_option("--instances", oc_instances, "number of random instances");
    oc->add_option("--seed", oc_seed, "master seed")->required();
    oc->add_option("--max-n", oc_max_n, "largest number of women");
    oc->add_option("--max-absk", oc_max_absk, "largest |k|");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args, trace_path, trace_stride, record_pt);
        if (sd->parsed()) {
            std::vector<int> ds;
            if (!d_list.empty())
                ds = parse_int_list(d_list, "--d-list");
            else if (d_from >= 1 && d_to >= d_from && d_step >= 1)
                for (int d = d_from; d <= d_to; d += d_step) ds.push_back(d);
            if (ds.empty())
                throw std::invalid_argument("sweep-degree needs --d-list or --d-from/--d-to/--d-step");
            RepOptions opts;
            opts.lazy = sd_args.lazy;
            opts.include_wosm = sd_args.wosm && !sd_args.lazy;
            opts.workers = sd_args.workers;
            const auto table = sweep_degree(sd_args.n, sd_args.k, ds, sd_args.reps, sd_args.seed, opts);
            write_or_print(table, sd_args.out, sd_args.format);
            std::printf("sweep-degree: %zu cells x %d reps at n=%d k=%d\n", ds.size(), sd_args.reps,
                        sd_args.n, sd_args.k);
            return 0;
        }
        if (si->parsed()) {
            RepOptions opts;
            opts.workers = si_args.workers;
            const auto table = sweep_imbalance(si_args.n, si_args.d, k_from, k_to, si_args.reps,
                                               si_args.seed, opts);
            write_or_print(table, si_args.out, si_args.format);
            std::printf("sweep-imbalance: k in [%d,%d] x %d reps at n=%d d=%d\n", k_from, k_to,
                        si_args.reps, si_args.n, si_args.d);
            return 0;
        }
        if (th->parsed()) {
            ThresholdSpec spec;
            spec.kind = th_kind == "rank-gap"        ? ThresholdKind::rank_gap
                        : th_kind == "unmatched-men" ? ThresholdKind::unmatched_men
                                                     : ThresholdKind::connectivity;
            spec.n = th_args.n;
            spec.reps = th_args.reps;
            spec.d_lo = th_dlo;
            spec.d_hi = th_dhi;
            spec.target = th_target;
            spec.workers = th_args.workers;
            const auto result = find_threshold(spec, th_args.seed);
            if (!th_args.out.empty())
                emit_table(threshold_table(spec, result), th_args.out, parse_format(th_args.format));
            std::printf("threshold %s n=%d reps=%d: d* = %d (%d probes)\n", th_kind.c_str(),
                        spec.n, spec.reps, result.d_star, result.probes);
            return 0;
        }
        if (hop->parsed()) return cmd_hopstats(hop_args, hop_sample, hop_max);
        if (cf->parsed())
            return cmd_counterfactual(cf_roster, cf_programs, cf_deltas, cf_reps, cf_randomize,
                                      cf_ks, cf_seed, cf_out, cf_format);
        if (oc->parsed()) return cmd_oracle_check(oc_instances, oc_seed, oc_max_n, oc_max_absk);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n(run with --help for usage)\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
