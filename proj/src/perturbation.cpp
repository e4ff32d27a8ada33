#include "fpp/perturbation.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpp {

TauField TauField::indicator(const std::set<Edge>& a) {
    if (a.empty()) throw std::invalid_argument("TauField::indicator: empty set");
    TauField f;
    double t = 1.0 / std::sqrt(double(a.size()));
    for (const Edge& e : a) f.values[e] = t;
    f.norm = 1.0;
    return f;
}

TauField TauField::from_envelope(const SmoothEnvelope& q) {
    if (q.values.empty()) throw std::invalid_argument("TauField::from_envelope: empty envelope");
    double norm2 = 0;
    for (const auto& [e, qe] : q.values) norm2 += qe * qe;
    double norm = std::sqrt(norm2);
    TauField f;
    for (const auto& [e, qe] : q.values) f.values[e] = qe / norm;
    f.norm = 1.0;
    return f;
}

double TauField::at(const Edge& e) const {
    auto it = values.find(e);
    return it == values.end() ? 0.0 : it->second;
}

double f_statistic(const Geodesic& g, const TauField& tau) {
    double s = 0;
    for (const Edge& e : g.edges) s += tau.at(e);
    return s;
}

double mu_estimate(const InfluenceField& field, const TauField& tau) {
    double s = 0;
    for (const auto& [e, t] : tau.values) s += t * field.p_hat(e);
    return s;
}

std::vector<CouplingRecord> run_coupling_batch(const WeightDistribution& dist, const Point& v,
                                               const std::vector<Point>& h_grid,
                                               const TauField& tau, uint64_t seed, double delta0) {
    if (!(delta0 > 0)) throw std::invalid_argument("run_coupling: delta0 must be positive");
    const int d = v.dim;
    Point origin = Point::zero(d);
    auto region0 = confinement_region(origin, v, dist.a(), dist.b());

    EdgeEnvironment env(dist, seed, region0);
    PerturbedEnvironment plus = perturb_environment(env, tau.values);
    GaussianRepresentation rep(env.distribution());
    NiceSet b_set = nice_set(rep, delta0);

    GeodesicSolver solver;
    Geodesic gamma0 = solver.shortest_path(env, region0, origin, v);
    Geodesic gamma0_plus = solver.shortest_path(plus, region0, origin, v);

    CouplingRecord base;
    base.seed = seed;
    base.delta0 = delta0;
    base.T0 = gamma0.time;
    base.T0_plus = gamma0_plus.time;
    base.f_gamma0 = f_statistic(gamma0, tau);
    base.f_gamma0_plus = f_statistic(gamma0_plus, tau);
    double tplus = 0;
    for (const Edge& e : gamma0.edges) tplus += plus.weight(e);
    base.Tplus_gamma0 = tplus;
    double gain = 0;
    for (const Edge& e : gamma0_plus.edges)
        if (b_set.contains(env.weight(e))) gain += tau.at(e);
    base.bdelta_gain = delta0 * gain;

    std::vector<CouplingRecord> records;
    records.reserve(h_grid.size());
    for (const Point& h : h_grid) {
        CouplingRecord rec = base;
        rec.h = h;
        auto region_h = confinement_region(h, v + h, dist.a(), dist.b());
        Geodesic gamma_h = solver.shortest_path(env, region_h, h, v + h);
        rec.Th = gamma_h.time;
        rec.Th_plus = solver.passage_time(plus, region_h, h, v + h);
        rec.f_gammah = f_statistic(gamma_h, tau);
        records.push_back(std::move(rec));
    }
    return records;
}

CouplingRecord run_coupling(const WeightDistribution& dist, const Point& v, const Point& h,
                            const TauField& tau, uint64_t seed, double delta0) {
    return run_coupling_batch(dist, v, {h}, tau, seed, delta0).front();
}

std::vector<std::string> coupling_violations(const CouplingRecord& rec,
                                             const WeightDistribution& dist, double c0) {
    std::vector<std::string> bad;
    if (!(rec.T0_plus >= rec.T0)) bad.push_back("T0_plus >= T0");
    if (!(rec.Th_plus >= rec.Th)) bad.push_back("Th_plus >= Th");
    if (!(rec.T0_plus <= rec.Tplus_gamma0)) bad.push_back("T0_plus <= Tplus(gamma0)");
    if (!(rec.Tplus_gamma0 <= rec.T0 + c0 * rec.f_gamma0))
        bad.push_back("Tplus(gamma0) <= T0 + C0*f(gamma0)");
    if (!(std::abs(rec.T0 - rec.Th) <= 2 * dist.b() * double(l1_norm(rec.h))))
        bad.push_back("|T0 - Th| <= 2b|h|_1");
    if (!(rec.Th_plus <= rec.Th + c0 * rec.f_gammah))
        bad.push_back("Th_plus <= Th + C0*f(gammah)");
    if (!(rec.T0_plus >= rec.T0 + rec.bdelta_gain)) bad.push_back("T0_plus >= T0 + Bdelta gain");
    return bad;
}

bool dyadic_level_qualifies(const std::vector<double>& f_samples, double mu, int k) {
    if (f_samples.empty()) throw std::invalid_argument("dyadic_level_search: empty samples");
    if (!(mu > 0)) throw std::invalid_argument("dyadic_level_search: mu must be positive");
    double threshold = std::pow(3.0, k) * mu;
    uint64_t tail = 0;
    for (double f : f_samples)
        if (f >= threshold) ++tail;
    return double(tail) / double(f_samples.size()) >= std::pow(4.0, -double(k) - 3);
}

std::optional<int> dyadic_level_search(const std::vector<double>& f_samples, double mu,
                                       int k_max) {
    for (int k = -1; k <= k_max; ++k)
        if (dyadic_level_qualifies(f_samples, mu, k)) return k;
    return std::nullopt;
}

TailTransferTable tail_transfer_from_samples(const std::vector<double>& f0,
                                             const std::map<Point, std::vector<double>>& fh,
                                             double t, const std::vector<double>& c1_grid) {
    if (f0.empty()) throw std::invalid_argument("tail_transfer: empty samples");
    TailTransferTable table;
    table.t = t;
    uint64_t tail0 = 0;
    for (double f : f0)
        if (f >= t) ++tail0;
    table.p0_tail = double(tail0) / double(f0.size());
    double rhs_base = std::pow(table.p0_tail, 1.5);

    for (double c1 : c1_grid) {
        bool all_pass = true;
        for (const auto& [h, samples] : fh) {
            TailTransferRow row;
            row.h = h;
            row.c1 = c1;
            row.applicable = l2_norm(h) < c1 * t;
            uint64_t tail = 0;
            for (double f : samples)
                if (f >= c1 * t) ++tail;
            row.lhs = double(tail) / double(samples.size());
            row.rhs = c1 * rhs_base;
            row.pass = row.lhs >= row.rhs;
            if (row.applicable && !row.pass) all_pass = false;
            table.rows.push_back(row);
        }
        if (all_pass && c1 > table.best_c1) table.best_c1 = c1;
    }
    return table;
}

TailTransferTable lemma_tail_transfer_check(const WeightDistribution& dist, const Point& v,
                                            double t, const std::vector<Point>& h_grid,
                                            uint64_t trials, uint64_t seed, const TauField& tau,
                                            int workers) {
    if (trials == 0) throw std::invalid_argument("lemma_tail_transfer_check: trials must be > 0");
    const int d = v.dim;
    Point origin = Point::zero(d);
    auto region0 = confinement_region(origin, v, dist.a(), dist.b());

    std::vector<double> f0(trials);
    std::map<Point, std::vector<double>> fh;
    for (const Point& h : h_grid) fh[h].resize(trials);

    int nthreads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel num_threads(nthreads)
    {
        GeodesicSolver solver;
#pragma omp for schedule(static)
        for (int64_t i = 0; i < int64_t(trials); ++i) {
            EdgeEnvironment env(dist, seed + uint64_t(i), region0);
            f0[i] = f_statistic(solver.shortest_path(env, region0, origin, v), tau);
            for (const Point& h : h_grid) {
                auto region_h = confinement_region(h, v + h, dist.a(), dist.b());
                fh[h][i] = f_statistic(solver.shortest_path(env, region_h, h, v + h), tau);
            }
        }
    }

    std::vector<double> c1_grid;
    for (int k = 1; k <= 8; ++k) c1_grid.push_back(std::pow(2.0, -k));
    return tail_transfer_from_samples(f0, fh, t, c1_grid);
}

}  // namespace fpp
