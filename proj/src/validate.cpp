#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fpp/experiments.hpp"
#include "fpp/fluctuations.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/perturbation.hpp"
#include "fpp/stats.hpp"
#include "json.hpp"

namespace fpp {

using ordered_json = nlohmann::ordered_json;

namespace {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Point> box_points(int d, int side) {
    Box box;
    box.lo = Point::zero(d);
    box.hi = Point::zero(d);
    for (int i = 0; i < d; ++i) box.hi.c[i] = side - 1;
    VertexIndexer ix(box);
    std::vector<Point> pts;
    for (int64_t i = 0; i < ix.size(); ++i) pts.push_back(ix.point(i));
    return pts;
}

Check check_oracle_equivalence(const WeightDistribution& dist, int d, int side, int seeds) {
    Check c{"oracle_equivalence_" + std::to_string(d) + "d", true, ""};
    auto pts = box_points(d, side);
    GeodesicSolver solver;
    int compared = 0;
    for (int s = 0; s < seeds && c.pass; ++s) {
        for (size_t i = 0; i < pts.size() && c.pass; ++i) {
            for (size_t j = i + 1; j < pts.size() && c.pass; ++j) {
                auto region = confinement_region(pts[i], pts[j], dist.a(), dist.b());
                EdgeEnvironment env(dist, 1000 + uint64_t(s), region);
                double fast = solver.passage_time(env, region, pts[i], pts[j]);
                auto [slow, path] = brute_force_passage_time(env, pts[i], pts[j], region);
                ++compared;
                if (fast != slow) {
                    c.pass = false;
                    c.detail = "mismatch at seed " + std::to_string(s);
                }
            }
        }
    }
    if (c.pass) c.detail = std::to_string(compared) + " pairs exact";
    return c;
}

Check check_metric_axioms(const WeightDistribution& dist) {
    Check c{"metric_axioms", true, ""};
    GeodesicSolver solver;
    CounterStream rnd(7, 0x6d6574726963ull);
    uint64_t ctr = 0;
    for (int trial = 0; trial < 40 && c.pass; ++trial) {
        Point pts[3];
        for (auto& p : pts) {
            p = Point::zero(2);
            for (int i = 0; i < 2; ++i) p.c[i] = int32_t(rnd.bits(ctr++) % 9) - 4;
        }
        EdgeEnvironment env(dist, 2000 + uint64_t(trial),
                            confinement_region(pts[0], pts[1], dist.a(), dist.b()));
        auto t = [&](const Point& x, const Point& y) {
            auto region = confinement_region(x, y, dist.a(), dist.b());
            return solver.passage_time(env, region, x, y);
        };
        double t01 = t(pts[0], pts[1]);
        double t10 = t(pts[1], pts[0]);
        if (std::abs(t01 - t10) > 1e-9) {
            c.pass = false;
            c.detail = "symmetry violated";
            break;
        }
        double t02 = t(pts[0], pts[2]), t21 = t(pts[2], pts[1]);
        if (t01 > t02 + t21 + 1e-9) {
            c.pass = false;
            c.detail = "triangle inequality violated";
            break;
        }
        double l1 = double(l1_norm(pts[0] - pts[1]));
        if (t01 < dist.a() * l1 - 1e-9 || t01 > dist.b() * l1 + 1e-9) {
            c.pass = false;
            c.detail = "support bounds violated";
            break;
        }
    }
    if (c.pass) c.detail = "symmetry, triangle, bounds on 40 triples";
    return c;
}

Check check_confinement_budget(const WeightDistribution& dist) {
    Check c{"confinement_budget_x2", true, ""};
    GeodesicSolver solver;
    for (int trial = 0; trial < 20 && c.pass; ++trial) {
        Point u = Point::zero(2);
        Point v = Point::of({8, (trial % 7) - 3});
        auto region = confinement_region(u, v, dist.a(), dist.b());
        auto wide = region;
        wide.budget *= 2;
        EdgeEnvironment env(dist, 3000 + uint64_t(trial), region);
        if (solver.passage_time(env, region, u, v) != solver.passage_time(env, wide, u, v)) {
            c.pass = false;
            c.detail = "time changed under budget x2";
        }
    }
    if (c.pass) c.detail = "20 endpoint pairs invariant";
    return c;
}

Check check_gplus_contracts(const WeightDistribution& dist, int samples) {
    Check c{"gplus_contracts", true, ""};
    GaussianRepresentation rep(dist);
    const double a = dist.a(), b = dist.b(), c0 = rep.lipschitz();
    CounterStream rnd(11, 0x67706c7573ull);
    std::vector<NiceSet> sets;
    for (double delta : {0.01, 0.05, 0.1}) sets.push_back(nice_set(rep, delta));
    for (int i = 0; i < samples && c.pass; ++i) {
        double w = a + (b - a) * rnd.uniform(2 * i);
        double tau = rnd.uniform(2 * i + 1);
        double g = gplus_apply(rep, tau, w);
        if (!(g >= w && g <= std::min(b, w + c0 * tau))) {
            c.pass = false;
            c.detail = "range contract violated at w=" + std::to_string(w);
            break;
        }
        for (const NiceSet& s : sets) {
            if (s.contains(w) && !(g >= w + s.delta * tau)) {
                c.pass = false;
                c.detail = "B_delta gain violated at delta=" + std::to_string(s.delta);
                break;
            }
        }
    }
    if (c.pass) c.detail = std::to_string(samples) + " samples, zero violations";
    return c;
}

Check check_gplus_bijection(const WeightDistribution& dist) {
    Check c{"gplus_bijection", true, ""};
    GaussianRepresentation rep(dist);
    for (int k = 1; k < 10 && c.pass; ++k) {
        PerturbationMap map(rep, k / 10.0);
        for (int i = 0; i <= 20; ++i) {
            double w = dist.a() + (dist.b() - dist.a()) * i / 20.0;
            double y = map.apply(w);
            if (std::abs(map.invert(y) - w) > 1e-9) {
                c.pass = false;
                c.detail = "roundtrip off at tau=" + std::to_string(k / 10.0);
                break;
            }
        }
    }
    if (c.pass) c.detail = "inverse roundtrip within 1e-9";
    return c;
}

Check check_mw_battery(const WeightDistribution& dist, uint64_t samples, int workers) {
    Check c{"mw_inequality_battery", true, ""};
    const int n = 2;
    auto tau = mw_battery_tau(n);
    double worst = INFINITY;
    for (const MwEvent& ev : mw_event_battery(dist, n)) {
        for (double p : {1.5, 2.0, 3.0}) {
            MwCheckResult r = verify_mw_inequality(dist, tau, ev.pred, p, samples, 97, workers);
            worst = std::min(worst, r.margin_sigmas);
            if (r.margin_sigmas < -3) {
                c.pass = false;
                c.detail = ev.name + " at p=" + std::to_string(p) + " margin " +
                           std::to_string(r.margin_sigmas) + " sigma";
                return c;
            }
        }
    }
    std::ostringstream os;
    os << "20 events x p in {1.5,2,3}, worst margin " << worst << " sigma";
    c.detail = os.str();
    return c;
}

Check check_envelope_ratio(const WeightDistribution& dist) {
    Check c{"envelope_log_smoothness", true, ""};
    (void)dist;
    std::set<Edge> gens;
    CounterStream rnd(13, 0x656e76ull);
    for (int i = 0; i < 8; ++i) {
        Edge e;
        e.base = Point::of({int32_t(rnd.bits(3 * i) % 21) - 10, int32_t(rnd.bits(3 * i + 1) % 21) - 10});
        e.axis = int8_t(rnd.bits(3 * i + 2) % 2);
        gens.insert(e);
    }
    double n = 40;
    SmoothEnvelope q = smooth_envelope(gens, n);
    double logn = std::log(n);
    uint64_t ctr = 1000;
    int checked = 0;
    std::vector<Edge> edges(q.values.size());
    size_t k = 0;
    for (const auto& [e, qe] : q.values) edges[k++] = e;
    for (int i = 0; i < 10000 && c.pass; ++i) {
        const Edge& e = edges[rnd.bits(ctr++) % edges.size()];
        const Edge& f = edges[rnd.bits(ctr++) % edges.size()];
        if (edge_center_distance(e, f) > 2 * logn) continue;
        double ratio = q.at(e) / q.at(f);
        ++checked;
        if (!(ratio >= 0.1 && ratio <= 10)) {
            c.pass = false;
            c.detail = "ratio " + std::to_string(ratio) + " outside [0.1, 10]";
        }
    }
    if (c.pass) c.detail = std::to_string(checked) + " nearby pairs in [0.1, 10]";
    return c;
}

Check check_influence_determinism(const ExperimentConfig& base) {
    Check c{"influence_determinism", true, ""};
    ExperimentConfig cfg = base;
    cfg.kind = "influence";
    cfg.v = {8, 0};
    cfg.n_grid.clear();
    cfg.trials = 200;
    RunOutcome a = render_influence(run_influence_field(cfg));
    RunOutcome b = render_influence(run_influence_field(cfg));
    if (a.artifacts != b.artifacts) {
        c.pass = false;
        c.detail = "repeated run produced different artifacts";
        return c;
    }
    ExperimentConfig serial = cfg;
    serial.workers = 1;
    ExperimentConfig wide = cfg;
    wide.workers = 4;
    InfluenceRun rs = run_influence_field(serial);
    InfluenceRun rw = run_influence_field(wide);
    InfluenceField ref =
        estimate_influence_reference(cfg.distribution.build(), cfg.target(), cfg.trials,
                                     cfg.master_seed);
    if (!(rs.field.hits == rw.field.hits && rs.field.hits == ref.hits)) {
        c.pass = false;
        c.detail = "worker count changed the field";
        return c;
    }
    c.detail = "byte-identical artifacts; workers 1/4 match serial reference";
    return c;
}

Check check_merge(const ExperimentConfig& base) {
    Check c{"merge_exactness", true, ""};
    ExperimentConfig cfg = base;
    cfg.kind = "influence";
    cfg.v = {8, 0};
    cfg.n_grid.clear();
    cfg.trials = 200;
    InfluenceRun whole = run_influence_field(cfg);
    ExperimentConfig first = cfg, second = cfg;
    first.trials = 80;
    second.trials = 120;
    second.master_seed = cfg.master_seed + 80;
    InfluenceRun merged = merge_influence_runs({run_influence_field(first), run_influence_field(second)});
    if (!(merged.field.hits == whole.field.hits && merged.field.trials == whole.field.trials)) {
        c.pass = false;
        c.detail = "split-merge differs from monolithic run";
    } else {
        c.detail = "80+120 split equals 200-trial run exactly";
    }
    return c;
}

Check check_env_order(const WeightDistribution& dist) {
    Check c{"environment_order_determinism", true, ""};
    Point u = Point::zero(2), v = Point::of({5, 3});
    auto region = confinement_region(u, v, dist.a(), dist.b());
    EdgeEnvironment env(dist, 42, region);
    Box box = region.bounding_box();
    VertexIndexer ix(box);
    std::map<Edge, double> forward, backward;
    for (int64_t i = 0; i < ix.size(); ++i)
        for (int axis = 0; axis < 2; ++axis) {
            Edge e;
            e.base = ix.point(i);
            e.axis = int8_t(axis);
            forward[e] = env.weight(e);
        }
    for (int64_t i = ix.size() - 1; i >= 0; --i)
        for (int axis = 1; axis >= 0; --axis) {
            Edge e;
            e.base = ix.point(i);
            e.axis = int8_t(axis);
            backward[e] = env.weight(e);
        }
    if (forward != backward) {
        c.pass = false;
        c.detail = "weights depend on enumeration order";
    } else {
        c.detail = std::to_string(forward.size()) + " edges identical under reversed enumeration";
    }
    return c;
}

Check check_coupling(const ExperimentConfig& base, const WeightDistribution& dist) {
    Check c{"coupling_inequalities", true, ""};
    Point v = Point::of({16, 0});
    ExperimentConfig cfg = base;
    cfg.v = {16, 0};
    InfluenceField field = estimate_influence(dist, v, 400, 5000);
    std::set<Edge> a = influence_set(field, 0.05).edges;
    if (a.empty()) {
        c.pass = false;
        c.detail = "influence set empty";
        return c;
    }
    TauField tau = TauField::from_envelope(smooth_envelope(a, 16.0));
    GaussianRepresentation rep(dist);
    double delta0 = delta_for_measure(rep, 0.95);
    Point h = Point::of({0, 1});
    int violations = 0;
    for (int i = 0; i < 30; ++i) {
        CouplingRecord rec = run_coupling(dist, v, h, tau, 6000 + uint64_t(i), delta0);
        violations += int(coupling_violations(rec, dist, rep.lipschitz()).size());
    }
    if (violations > 0) {
        c.pass = false;
        c.detail = std::to_string(violations) + " violations over 30 records";
    } else {
        c.detail = "30 records, all deterministic inequalities hold";
    }
    return c;
}

Check check_trivial_bound(const WeightDistribution& dist) {
    Check c{"trivial_count_bound", true, ""};
    InfluenceField field = estimate_influence(dist, Point::of({12, 0}), 500, 7000);
    c.pass = trivial_count_bound_check(field);
    c.detail = c.pass ? "Markov bound holds on the default grid" : "bound violated";
    return c;
}

}  // namespace

RunOutcome run_validate(const ExperimentConfig& cfg) {
    WeightDistribution dist = cfg.distribution.build();
    WeightDistribution linear = WeightDistribution::truncated_linear(dist.a(), dist.b(), 1.0);
    int workers = cfg.workers;

    std::vector<Check> checks;
    checks.push_back(check_oracle_equivalence(dist, 2, 3, 20));
    checks.push_back(check_oracle_equivalence(dist, 3, 2, 10));
    checks.push_back(check_metric_axioms(dist));
    checks.push_back(check_confinement_budget(dist));
    checks.push_back(check_gplus_contracts(dist, 10000));
    {
        Check lin = check_gplus_contracts(linear, 10000);
        lin.name += "_truncated_linear";
        checks.push_back(lin);
    }
    checks.push_back(check_gplus_bijection(dist));
    checks.push_back(check_mw_battery(dist, cfg.mw_samples, workers));
    checks.push_back(check_envelope_ratio(dist));
    checks.push_back(check_influence_determinism(cfg));
    checks.push_back(check_merge(cfg));
    checks.push_back(check_env_order(dist));
    checks.push_back(check_coupling(cfg, dist));
    checks.push_back(check_trivial_bound(dist));

    RunOutcome out;
    ordered_json rep;
    rep["config"] = ordered_json::object();
    rep["config"]["kind"] = "validate";
    rep["config"]["distribution"] = {{"family", cfg.distribution.family},
                                     {"a", cfg.distribution.a},
                                     {"b", cfg.distribution.b},
                                     {"slope", cfg.distribution.slope}};
    rep["config"]["mw_samples"] = cfg.mw_samples;
    ordered_json list = ordered_json::array();
    bool all_ok = true;
    for (const Check& c : checks) {
        list.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        all_ok = all_ok && c.pass;
        out.log_lines.push_back(std::string(c.pass ? "[PASS] " : "[FAIL] ") + c.name + " - " +
                                c.detail);
    }
    rep["checks"] = list;
    rep["invariants_ok"] = all_ok;
    out.artifacts["report.json"] = rep.dump(2) + "\n";
    out.exit_code = all_ok ? 0 : 1;
    return out;
}

}  // namespace fpp
