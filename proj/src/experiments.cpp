#include "fpp/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "fpp/fluctuations.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/perturbation.hpp"
#include "fpp/stats.hpp"
#include "json.hpp"

namespace fpp {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

int resolve_workers(const ExperimentConfig& cfg) {
    if (cfg.workers > 0) return cfg.workers;
    if (const char* env = std::getenv("FPP_LAB_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return omp_get_max_threads();
}

ordered_json config_echo(const ExperimentConfig& cfg) {
    ordered_json j;
    j["kind"] = cfg.kind;
    j["d"] = cfg.d;
    if (!cfg.v.empty()) j["v"] = cfg.v;
    if (!cfg.n_grid.empty()) j["n_grid"] = cfg.n_grid;
    j["distribution"] = {{"family", cfg.distribution.family},
                         {"a", cfg.distribution.a},
                         {"b", cfg.distribution.b},
                         {"slope", cfg.distribution.slope}};
    j["trials"] = cfg.trials;
    j["master_seed"] = cfg.master_seed;
    j["epsilon_grid"] = cfg.epsilon_grid;
    j["beta_grid"] = cfg.beta_grid;
    j["radius_coeffs"] = cfg.radius_coeffs;
    j["h_grid"] = cfg.h_grid;
    j["tau"] = {{"type", cfg.tau.type}, {"epsilon", cfg.tau.epsilon}, {"trials", cfg.tau.trials}};
    j["ratio_epsilon"] = cfg.ratio_epsilon;
    j["delta0_target"] = cfg.delta0_target;
    j["envelope_floor"] = cfg.envelope_floor;
    j["mw_samples"] = cfg.mw_samples;
    j["k_max"] = cfg.k_max;
    return j;
}

// The part of the config that must agree for runs to be mergeable.
ordered_json merge_signature(const ExperimentConfig& cfg) {
    ordered_json j = config_echo(cfg);
    j.erase("trials");
    j.erase("master_seed");
    return j;
}

ordered_json fit_json(const ExponentFit& fit) {
    ordered_json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    return j;
}

Point axis_target(int d, int n) {
    Point v = Point::zero(d);
    v.c[0] = n;
    return v;
}

std::vector<int> scales_of(const ExperimentConfig& cfg) {
    if (!cfg.n_grid.empty()) return cfg.n_grid;
    return {int(l2_norm(cfg.target()) + 0.5)};
}

uint64_t tau_field_seed(const ExperimentConfig& cfg) {
    return mix64(cfg.master_seed ^ 0x7461752d7365656cull);
}

TauField build_tau_field(const ExperimentConfig& cfg, const Point& v, InfluenceField* field_out) {
    WeightDistribution dist = cfg.distribution.build();
    InfluenceField field =
        estimate_influence(dist, v, cfg.tau.trials, tau_field_seed(cfg), resolve_workers(cfg));
    if (field_out) *field_out = field;
    std::set<Edge> a = influence_set(field, cfg.tau.epsilon).edges;
    if (a.empty())
        throw std::runtime_error("tau field: influence set empty at epsilon=" + fmt(cfg.tau.epsilon));
    if (cfg.tau.type == "indicator") return TauField::indicator(a);
    double n = std::max(3.0, l2_norm(v));
    return TauField::from_envelope(smooth_envelope(a, n, cfg.envelope_floor));
}

}  // namespace

// --- influence ---------------------------------------------------------------

InfluenceRun run_influence_field(const ExperimentConfig& cfg) {
    InfluenceRun run;
    run.cfg = cfg;
    run.field = estimate_influence(cfg.distribution.build(), cfg.target(), cfg.trials,
                                   cfg.master_seed, resolve_workers(cfg));
    return run;
}

InfluenceRun merge_influence_runs(std::vector<InfluenceRun> runs) {
    if (runs.empty()) throw std::invalid_argument("merge: no runs");
    std::sort(runs.begin(), runs.end(), [](const InfluenceRun& x, const InfluenceRun& y) {
        return x.field.seed_begin < y.field.seed_begin;
    });
    const ordered_json sig = merge_signature(runs.front().cfg);
    InfluenceRun merged = runs.front();
    for (size_t i = 1; i < runs.size(); ++i) {
        if (merge_signature(runs[i].cfg) != sig)
            throw ConfigError("merge: configs differ beyond seed range");
        if (runs[i].field.seed_begin != merged.field.seed_begin + merged.field.trials)
            throw ConfigError("merge: seed ranges not contiguous");
        merged.field = merge_fields(merged.field, runs[i].field);
    }
    merged.cfg.master_seed = merged.field.seed_begin;
    merged.cfg.trials = merged.field.trials;
    return merged;
}

RunOutcome render_influence(const InfluenceRun& run) {
    const ExperimentConfig& cfg = run.cfg;
    const InfluenceField& field = run.field;
    const WeightDistribution dist = cfg.distribution.build();
    const Point v = cfg.target();
    RunOutcome out;

    // field.csv
    std::string csv;
    for (int i = 0; i < cfg.d; ++i) csv += "base_" + std::to_string(i) + ",";
    csv += "axis,hits,trials,p_hat,ci_lo,ci_hi\n";
    for (const auto& [e, h] : field.hits) {
        for (int i = 0; i < cfg.d; ++i) csv += std::to_string(e.base.c[i]) + ",";
        WilsonInterval w = wilson_interval(h, field.trials);
        csv += std::to_string(int(e.axis)) + "," + std::to_string(h) + "," +
               std::to_string(field.trials) + "," + fmt(double(h) / double(field.trials)) + "," +
               fmt(w.lo) + "," + fmt(w.hi) + "\n";
    }
    out.artifacts["field.csv"] = csv;

    // sidecar metadata
    ordered_json meta;
    meta["v"] = cfg.v;
    meta["d"] = cfg.d;
    meta["distribution"] = config_echo(cfg)["distribution"];
    meta["master_seed"] = field.seed_begin;
    meta["trials"] = field.trials;
    out.artifacts["field.meta.json"] = meta.dump(2) + "\n";

    // report
    ordered_json rep;
    rep["config"] = config_echo(cfg);
    double sum_p = field.sum_p_hat();
    double lo = double(l1_norm(v));
    double hi = dist.b() / dist.a() * lo;
    rep["sum_p_hat"] = sum_p;
    rep["sum_p_hat_bounds"] = {{"lo", lo}, {"hi", hi}};
    bool sum_ok = sum_p >= lo - 1e-9 && sum_p <= hi + 1e-9;

    bool nested_ok = true, monotone_ok = true;
    ordered_json a_table = ordered_json::array();
    std::vector<std::pair<double, double>> slope_pairs;
    size_t prev_size = SIZE_MAX;
    std::vector<double> eps_sorted = cfg.epsilon_grid;
    std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<>());
    for (double eps : eps_sorted) {
        InfluenceSet s = influence_set(field, eps);
        ordered_json row;
        row["epsilon"] = eps;
        row["size"] = s.edges.size();
        row["size_wilson_lo"] = s.lower.size();
        row["size_wilson_hi"] = s.upper.size();
        a_table.push_back(row);
        if (!std::includes(s.edges.begin(), s.edges.end(), s.lower.begin(), s.lower.end()) ||
            !std::includes(s.upper.begin(), s.upper.end(), s.edges.begin(), s.edges.end()))
            nested_ok = false;
        if (s.edges.size() != 0 && prev_size != SIZE_MAX && s.edges.size() < prev_size)
            monotone_ok = false;  // larger eps must not give a larger set
        prev_size = s.edges.size();
        if (s.edges.size() > 0) slope_pairs.push_back({1.0 / eps, double(s.edges.size())});
    }
    rep["a_epsilon"] = a_table;
    if (slope_pairs.size() >= 3)
        rep["a_epsilon_slope_fit"] = fit_json(fit_exponent(slope_pairs));
    else
        rep["a_epsilon_slope_fit"] = nullptr;

    ordered_json lp_table = ordered_json::array();
    for (double beta : cfg.beta_grid)
        lp_table.push_back({{"beta", beta}, {"value", lp_sum(field, beta)}});
    rep["lp_sums"] = lp_table;

    bool trivial_ok = trivial_count_bound_check(field, cfg.epsilon_grid);

    rep["verdicts"] = {{"sum_p_hat_within_bounds", sum_ok},
                       {"wilson_sets_nested", nested_ok},
                       {"a_epsilon_antitone", monotone_ok},
                       {"trivial_count_bound", trivial_ok}};
    bool ok = sum_ok && nested_ok && monotone_ok && trivial_ok;
    rep["invariants_ok"] = ok;
    out.artifacts["report.json"] = rep.dump(2) + "\n";
    out.exit_code = ok ? 0 : 1;
    out.log_lines.push_back(std::string(ok ? "[PASS]" : "[FAIL]") + " influence invariants");
    return out;
}

namespace {

RunOutcome run_influence(const ExperimentConfig& cfg) {
    return render_influence(run_influence_field(cfg));
}

// --- fluctuation -------------------------------------------------------------

RunOutcome run_fluctuation(const ExperimentConfig& cfg) {
    const WeightDistribution dist = cfg.distribution.build();
    const int d = cfg.d;
    const int workers = resolve_workers(cfg);
    RunOutcome out;

    struct TrialRow {
        double max_dev = 0;
        double median_dev = 0;
        std::vector<int> counts;
        bool monotone = true;
    };

    std::string csv = "seed,n,ell,r,count,max_dev\n";
    ordered_json per_scale = ordered_json::array();
    std::vector<std::pair<double, double>> max_dev_pairs, median_dev_pairs;
    ordered_json c_star_table = ordered_json::array();
    bool monotone_ok = true;
    double c_star_min = INFINITY, c_star_max = 0;
    bool c_star_all_positive = true;

    for (int n : scales_of(cfg)) {
        Point v = axis_target(d, n);
        Point origin = Point::zero(d);
        auto region = confinement_region(origin, v, dist.a(), dist.b());
        const double ell = l2_norm(v);
        std::vector<double> radii;
        for (double c : cfg.radius_coeffs) radii.push_back(c * std::pow(double(n), 1.0 / (d + 1)));

        std::vector<TrialRow> rows(cfg.trials);
#pragma omp parallel num_threads(workers)
        {
            GeodesicSolver solver;
#pragma omp for schedule(static)
            for (int64_t i = 0; i < int64_t(cfg.trials); ++i) {
                EdgeEnvironment env(dist, cfg.master_seed + uint64_t(i), region);
                Geodesic g = solver.shortest_path(env, region, origin, v);
                TrialRow& row = rows[i];
                row.max_dev = max_transversal_deviation(g, v);
                row.median_dev = median_transversal_deviation(g, v, ell);
                row.counts.reserve(radii.size());
                int prev = INT32_MAX;
                for (double r : radii) {
                    int c = outside_cylinder_count(g, v, ell, r);
                    if (c > prev) row.monotone = false;
                    prev = c;
                    row.counts.push_back(c);
                }
            }
        }

        std::vector<double> max_devs, median_devs;
        std::vector<int64_t> count_sums(radii.size(), 0);
        for (uint64_t i = 0; i < cfg.trials; ++i) {
            const TrialRow& row = rows[i];
            monotone_ok = monotone_ok && row.monotone;
            max_devs.push_back(row.max_dev);
            median_devs.push_back(row.median_dev);
            for (size_t k = 0; k < radii.size(); ++k) {
                count_sums[k] += row.counts[k];
                csv += std::to_string(cfg.master_seed + i) + "," + std::to_string(n) + "," +
                       fmt(ell) + "," + fmt(radii[k]) + "," + std::to_string(row.counts[k]) + "," +
                       fmt(row.max_dev) + "\n";
            }
        }

        double med_max = median(max_devs);
        double med_median = median(median_devs);
        double c_star = 0;
        ordered_json mean_counts = ordered_json::array();
        for (size_t k = 0; k < radii.size(); ++k) {
            double mean = double(count_sums[k]) / double(cfg.trials);
            mean_counts.push_back(
                {{"c", cfg.radius_coeffs[k]}, {"r", radii[k]}, {"mean_count", mean}});
            if (mean >= double(n) / 2.0) c_star = std::max(c_star, cfg.radius_coeffs[k]);
        }
        ordered_json scale_row;
        scale_row["n"] = n;
        scale_row["trials"] = cfg.trials;
        scale_row["median_max_dev"] = med_max;
        scale_row["median_median_dev"] = med_median;
        scale_row["mean_counts"] = mean_counts;
        scale_row["c_star"] = c_star;
        per_scale.push_back(scale_row);

        if (med_max > 0) max_dev_pairs.push_back({double(n), med_max});
        if (med_median > 0) median_dev_pairs.push_back({double(n), med_median});
        c_star_table.push_back({{"n", n}, {"c_star", c_star}});
        if (c_star > 0) {
            c_star_min = std::min(c_star_min, c_star);
            c_star_max = std::max(c_star_max, c_star);
        } else {
            c_star_all_positive = false;
        }
    }

    out.artifacts["trials.csv"] = csv;

    ordered_json rep;
    rep["config"] = config_echo(cfg);
    rep["per_scale"] = per_scale;
    rep["fits"] = ordered_json::object();
    rep["fits"]["median_max_dev_vs_n"] =
        max_dev_pairs.size() >= 3 ? fit_json(fit_exponent(max_dev_pairs)) : ordered_json(nullptr);
    rep["fits"]["median_median_dev_vs_n"] = median_dev_pairs.size() >= 3
                                                ? fit_json(fit_exponent(median_dev_pairs))
                                                : ordered_json(nullptr);
    rep["c_star"] = ordered_json::object();
    rep["c_star"]["values"] = c_star_table;
    rep["c_star"]["all_positive"] = c_star_all_positive;
    rep["c_star"]["max_over_min"] = c_star_all_positive && c_star_min > 0
                                        ? ordered_json(c_star_max / c_star_min)
                                        : ordered_json(nullptr);
    rep["verdicts"] = {{"counts_monotone_in_r", monotone_ok}};
    rep["invariants_ok"] = monotone_ok;
    out.artifacts["report.json"] = rep.dump(2) + "\n";
    out.exit_code = monotone_ok ? 0 : 1;
    out.log_lines.push_back(std::string(monotone_ok ? "[PASS]" : "[FAIL]") +
                            " fluctuation invariants");
    return out;
}

// --- coupling ----------------------------------------------------------------

RunOutcome run_coupling_experiment(const ExperimentConfig& cfg) {
    const WeightDistribution dist = cfg.distribution.build();
    const Point v = cfg.target();
    const int workers = resolve_workers(cfg);
    RunOutcome out;

    InfluenceField tau_source;
    TauField tau = build_tau_field(cfg, v, &tau_source);
    GaussianRepresentation rep(dist);
    double delta0 = delta_for_measure(rep, cfg.delta0_target);
    double b_measure = nice_set(rep, delta0).measure(dist);
    const std::vector<Point> hs = cfg.h_points();

    std::vector<std::vector<CouplingRecord>> per_trial(cfg.trials);
#pragma omp parallel for schedule(static) num_threads(workers)
    for (int64_t i = 0; i < int64_t(cfg.trials); ++i)
        per_trial[i] = run_coupling_batch(dist, v, hs, tau, cfg.master_seed + uint64_t(i), delta0);

    const double c0 = rep.lipschitz();
    std::string csv = "seed";
    for (int i = 0; i < cfg.d; ++i) csv += ",h_" + std::to_string(i);
    csv += ",T0,T0_plus,Th,Th_plus,Tplus_gamma0,f_gamma0,f_gamma0_plus,f_gammah,bdelta_gain,delta0\n";

    uint64_t violation_count = 0;
    std::string first_violation;
    std::vector<double> f0;
    std::map<Point, std::vector<double>> fh;
    for (const auto& batch : per_trial) {
        f0.push_back(batch.front().f_gamma0);
        for (const CouplingRecord& rec : batch) {
            fh[rec.h].push_back(rec.f_gammah);
            for (const std::string& bad : coupling_violations(rec, dist, c0)) {
                ++violation_count;
                if (first_violation.empty())
                    first_violation = "seed " + std::to_string(rec.seed) + ": " + bad;
            }
            csv += std::to_string(rec.seed);
            for (int i = 0; i < cfg.d; ++i) csv += "," + std::to_string(rec.h.c[i]);
            csv += "," + fmt(rec.T0) + "," + fmt(rec.T0_plus) + "," + fmt(rec.Th) + "," +
                   fmt(rec.Th_plus) + "," + fmt(rec.Tplus_gamma0) + "," + fmt(rec.f_gamma0) + "," +
                   fmt(rec.f_gamma0_plus) + "," + fmt(rec.f_gammah) + "," + fmt(rec.bdelta_gain) +
                   "," + fmt(rec.delta0) + "\n";
        }
    }
    out.artifacts["records.csv"] = csv;

    double mu_hat = mean_var(f0).mean;
    int k_max = cfg.k_max > 0 ? cfg.k_max : int(std::ceil(std::log(std::max(3.0, l2_norm(v)))));
    std::optional<int> level =
        mu_hat > 0 ? dyadic_level_search(f0, mu_hat, k_max) : std::nullopt;

    std::vector<double> c1_grid;
    for (int k = 1; k <= 8; ++k) c1_grid.push_back(std::pow(2.0, -k));
    TailTransferTable table = tail_transfer_from_samples(f0, fh, mu_hat, c1_grid);

    ordered_json rep_j;
    rep_j["config"] = config_echo(cfg);
    rep_j["tau"] = {{"type", cfg.tau.type},
                    {"epsilon", cfg.tau.epsilon},
                    {"support_size", tau.values.size()},
                    {"norm", tau.norm}};
    rep_j["delta0"] = delta0;
    rep_j["b_delta0_measure"] = b_measure;
    rep_j["c0"] = c0;
    bool ok = violation_count == 0;
    rep_j["verdicts"] = {{"deterministic_inequalities", ok},
                         {"violation_count", violation_count},
                         {"first_violation", first_violation}};
    rep_j["mu_hat"] = mu_hat;
    rep_j["mu_from_tau_field"] = mu_estimate(tau_source, tau);
    rep_j["k_max"] = k_max;
    rep_j["dyadic_level"] = level ? ordered_json(*level) : ordered_json(nullptr);
    ordered_json tail = ordered_json::object();
    tail["t"] = table.t;
    tail["p0_tail"] = table.p0_tail;
    tail["best_c1"] = table.best_c1;
    ordered_json rows = ordered_json::array();
    for (const TailTransferRow& r : table.rows) {
        std::vector<int32_t> h(r.h.c.begin(), r.h.c.begin() + cfg.d);
        rows.push_back({{"h", h},
                        {"c1", r.c1},
                        {"applicable", r.applicable},
                        {"lhs", r.lhs},
                        {"rhs", r.rhs},
                        {"pass", r.pass}});
    }
    tail["rows"] = rows;
    rep_j["tail_transfer"] = tail;
    rep_j["invariants_ok"] = ok;
    out.artifacts["report.json"] = rep_j.dump(2) + "\n";
    out.exit_code = ok ? 0 : 1;
    out.log_lines.push_back(std::string(ok ? "[PASS]" : "[FAIL]") +
                            " coupling deterministic inequalities (" +
                            std::to_string(violation_count) + " violations)");
    return out;
}

// --- ratio ---------------------------------------------------------------------

RunOutcome run_ratio(const ExperimentConfig& cfg) {
    const WeightDistribution dist = cfg.distribution.build();
    const int workers = resolve_workers(cfg);
    RunOutcome out;

    ordered_json table = ordered_json::array();
    double r_min = INFINITY, r_max = 0;
    bool finite_ok = true;
    for (int n : scales_of(cfg)) {
        Point v = axis_target(cfg.d, n);
        InfluenceField field = estimate_influence(dist, v, cfg.trials, cfg.master_seed, workers);
        std::set<Edge> a = influence_set(field, cfg.ratio_epsilon).edges;
        if (a.empty())
            throw std::runtime_error("ratio: influence set empty at n=" + std::to_string(n));
        SmoothEnvelope env = smooth_envelope(a, std::max(3.0, double(n)), cfg.envelope_floor);
        double r = proposition_ratio(env, field, cfg.d);
        if (!std::isfinite(r) || r < 0) finite_ok = false;
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
        table.push_back({{"n", n},
                         {"a_epsilon_size", a.size()},
                         {"envelope_size", env.values.size()},
                         {"ratio", r}});
    }

    ordered_json rep;
    rep["config"] = config_echo(cfg);
    rep["epsilon"] = cfg.ratio_epsilon;
    rep["table"] = table;
    rep["max_over_min"] = r_min > 0 ? ordered_json(r_max / r_min) : ordered_json(nullptr);
    rep["verdicts"] = {{"ratios_finite", finite_ok}};
    rep["invariants_ok"] = finite_ok;
    out.artifacts["report.json"] = rep.dump(2) + "\n";
    out.exit_code = finite_ok ? 0 : 1;
    out.log_lines.push_back(std::string(finite_ok ? "[PASS]" : "[FAIL]") + " ratio computation");
    return out;
}

}  // namespace

RunOutcome run_validate(const ExperimentConfig& cfg);  // validate.cpp

RunOutcome run_experiment(const ExperimentConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    RunOutcome out;
    if (cfg.kind == "influence")
        out = run_influence(cfg);
    else if (cfg.kind == "fluctuation")
        out = run_fluctuation(cfg);
    else if (cfg.kind == "coupling")
        out = run_coupling_experiment(cfg);
    else if (cfg.kind == "ratio")
        out = run_ratio(cfg);
    else if (cfg.kind == "validate")
        out = run_validate(cfg);
    else
        throw ConfigError("$.kind: unknown experiment '" + cfg.kind + "'");
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void write_outcome(const RunOutcome& outcome, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    for (const auto& [name, content] : outcome.artifacts) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(out_dir) / name).string());
        f << content;
    }
    // Timing is environment-dependent, so it lives outside the artifacts.
    ordered_json timing;
    timing["wall_seconds"] = outcome.wall_seconds;
    std::ofstream t(fs::path(out_dir) / "timing.json", std::ios::binary);
    t << timing.dump(2) << "\n";
    std::ofstream log(fs::path(out_dir) / "run.log", std::ios::binary);
    for (const std::string& line : outcome.log_lines) log << line << "\n";
}

}  // namespace fpp
