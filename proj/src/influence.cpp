#include "fpp/influence.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "fpp/stats.hpp"

namespace fpp {

double InfluenceField::p_hat(const Edge& e) const {
    auto it = hits.find(e);
    if (it == hits.end()) return 0.0;
    return double(it->second) / double(trials);
}

double InfluenceField::sum_p_hat() const {
    double s = 0;
    for (const auto& [e, h] : hits) s += double(h);
    return s / double(trials);
}

namespace {

using LocalHits = std::unordered_map<Edge, uint64_t, EdgeHash>;

void accumulate_trial(const WeightDistribution& dist, const Point& v, uint64_t seed,
                      GeodesicSolver& solver, const ConfinementRegion& region, LocalHits& hits) {
    Point origin = Point::zero(v.dim);
    EdgeEnvironment env(dist, seed, region);
    Geodesic g = solver.shortest_path(env, region, origin, v);
    for (const Edge& e : g.edges) ++hits[e];
}

}  // namespace

InfluenceField estimate_influence(const WeightDistribution& dist, const Point& v, uint64_t trials,
                                  uint64_t master_seed, int workers) {
    if (trials == 0) throw std::invalid_argument("estimate_influence: trials must be positive");
    if (l2_norm(v) < 2) throw std::invalid_argument("estimate_influence: |v| must be at least 2");

    Point origin = Point::zero(v.dim);
    auto region = confinement_region(origin, v, dist.a(), dist.b());

    int nthreads = workers > 0 ? workers : omp_get_max_threads();
    std::vector<LocalHits> partial(nthreads);

#pragma omp parallel num_threads(nthreads)
    {
        GeodesicSolver solver;
        LocalHits& local = partial[omp_get_thread_num()];
#pragma omp for schedule(static)
        for (int64_t i = 0; i < int64_t(trials); ++i)
            accumulate_trial(dist, v, master_seed + uint64_t(i), solver, region, local);
    }

    InfluenceField field;
    field.target = v;
    field.trials = trials;
    field.seed_begin = master_seed;
    for (const LocalHits& local : partial)
        for (const auto& [e, h] : local) field.hits[e] += h;
    return field;
}

InfluenceField estimate_influence_reference(const WeightDistribution& dist, const Point& v,
                                            uint64_t trials, uint64_t master_seed) {
    if (trials == 0) throw std::invalid_argument("estimate_influence: trials must be positive");
    if (l2_norm(v) < 2) throw std::invalid_argument("estimate_influence: |v| must be at least 2");
    Point origin = Point::zero(v.dim);
    auto region = confinement_region(origin, v, dist.a(), dist.b());
    GeodesicSolver solver;
    LocalHits hits;
    for (uint64_t i = 0; i < trials; ++i)
        accumulate_trial(dist, v, master_seed + i, solver, region, hits);
    InfluenceField field;
    field.target = v;
    field.trials = trials;
    field.seed_begin = master_seed;
    for (const auto& [e, h] : hits) field.hits[e] += h;
    return field;
}

InfluenceField merge_fields(const InfluenceField& x, const InfluenceField& y) {
    if (!(x.target == y.target)) throw std::invalid_argument("merge_fields: targets differ");
    InfluenceField m = x;
    m.trials += y.trials;
    m.seed_begin = std::min(x.seed_begin, y.seed_begin);
    for (const auto& [e, h] : y.hits) m.hits[e] += h;
    return m;
}

InfluenceSet influence_set(const InfluenceField& field, double epsilon) {
    if (!(epsilon > 0 && epsilon <= 1))
        throw std::invalid_argument("influence_set: epsilon must be in (0, 1]");
    InfluenceSet set;
    set.epsilon = epsilon;
    for (const auto& [e, h] : field.hits) {
        double p = double(h) / double(field.trials);
        if (p >= epsilon) set.edges.insert(e);
        WilsonInterval w = wilson_interval(h, field.trials);
        if (w.lo >= epsilon) set.lower.insert(e);
        if (w.hi >= epsilon) set.upper.insert(e);
    }
    return set;
}

double lp_sum(const InfluenceField& field, double beta) {
    if (!(beta >= 1)) throw std::invalid_argument("lp_sum: beta must be at least 1");
    double s = 0;
    for (const auto& [e, h] : field.hits)
        if (h > 0) s += std::pow(double(h) / double(field.trials), beta);
    return s;
}

double SmoothEnvelope::at(const Edge& e) const {
    auto it = values.find(e);
    return it == values.end() ? 0.0 : it->second;
}

SmoothEnvelope smooth_envelope(const std::set<Edge>& generators, double n, double floor) {
    if (generators.empty()) throw std::invalid_argument("smooth_envelope: generators empty");
    if (!(n >= 3)) throw std::invalid_argument("smooth_envelope: n must be at least 3");
    if (!(floor > 0 && floor < 1)) throw std::invalid_argument("smooth_envelope: floor in (0,1)");

    const double scale = std::log(n);
    const int d = generators.begin()->base.dim;
    // q >= floor iff distance <= -log(floor) * scale.
    const double max_dist = -std::log(floor) * scale;
    const int32_t reach = static_cast<int32_t>(std::ceil(max_dist)) + 1;

    Box bbox;
    bbox.lo = generators.begin()->base;
    bbox.hi = bbox.lo;
    for (const Edge& g : generators) {
        for (int i = 0; i < d; ++i) {
            bbox.lo.c[i] = std::min(bbox.lo.c[i], g.base.c[i]);
            bbox.hi.c[i] = std::max(bbox.hi.c[i], g.base.c[i]);
        }
    }
    bbox = bbox.inflated(reach);

    std::vector<std::array<double, kMaxDim>> centers;
    centers.reserve(generators.size());
    for (const Edge& g : generators) centers.push_back(g.center());

    SmoothEnvelope env;
    env.scale = scale;
    env.floor = floor;

    const double max_dist2 = max_dist * max_dist;
    VertexIndexer ix(bbox);
    for (int64_t i = 0; i < ix.size(); ++i) {
        Point base = ix.point(i);
        for (int axis = 0; axis < d; ++axis) {
            Edge e;
            e.base = base;
            e.axis = static_cast<int8_t>(axis);
            auto c = e.center();
            double best = max_dist2;
            for (const auto& g : centers) {
                double s = 0;
                for (int k = 0; k < d; ++k) {
                    double diff = c[k] - g[k];
                    s += diff * diff;
                    if (s > best) break;
                }
                if (s < best) best = s;
            }
            if (best < max_dist2) {
                double q = std::exp(-std::sqrt(best) / scale);
                if (q >= floor) env.values[e] = q;
            }
        }
    }
    return env;
}

double proposition_ratio(const SmoothEnvelope& q, const InfluenceField& field, int d) {
    if (q.values.empty()) throw std::invalid_argument("proposition_ratio: empty envelope");
    double sum_qp = 0, sum_q = 0, sum_q2 = 0;
    for (const auto& [e, qe] : q.values) {
        sum_q += qe;
        sum_q2 += qe * qe;
        sum_qp += qe * field.p_hat(e);
    }
    double denom = std::pow(sum_q2, 0.5 * (d - 1)) * sum_q;
    return std::pow(sum_qp, double(d)) / denom;
}

bool trivial_count_bound_check(const InfluenceField& field, const std::vector<double>& eps_grid) {
    if (field.hits.empty()) throw std::invalid_argument("trivial_count_bound_check: empty field");
    double total = field.sum_p_hat();
    for (double eps : eps_grid) {
        uint64_t count = 0;
        for (const auto& [e, h] : field.hits)
            if (double(h) / double(field.trials) >= eps) ++count;
        if (double(count) > total / eps + 1e-9) return false;
    }
    return true;
}

}  // namespace fpp
