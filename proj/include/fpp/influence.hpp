#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "fpp/geodesic.hpp"
#include "fpp/lattice.hpp"
#include "fpp/weights.hpp"

namespace fpp {

// Monte Carlo estimate of p_e = P(e in gamma(0, v)): hit counts per canonical
// edge over independent trial environments (trial i uses seed
// master_seed + i).
struct InfluenceField {
    Point target;
    uint64_t trials = 0;
    uint64_t seed_begin = 0;
    std::map<Edge, uint64_t> hits;

    double p_hat(const Edge& e) const;
    double sum_p_hat() const;
};

InfluenceField estimate_influence(const WeightDistribution& dist, const Point& v, uint64_t trials,
                                  uint64_t master_seed, int workers = 0);

// Plain serial loop, kept as the reference the parallel kernel is checked
// against.
InfluenceField estimate_influence_reference(const WeightDistribution& dist, const Point& v,
                                            uint64_t trials, uint64_t master_seed);

// Exact merge of runs over disjoint seed ranges.
InfluenceField merge_fields(const InfluenceField& x, const InfluenceField& y);

// A_epsilon thresholded on the point estimates, with the conservative Wilson
// lower/upper variants alongside.
struct InfluenceSet {
    double epsilon = 0;
    std::set<Edge> edges;       // p_hat >= epsilon
    std::set<Edge> lower;       // Wilson 95% lower bound >= epsilon
    std::set<Edge> upper;       // Wilson 95% upper bound >= epsilon
};

InfluenceSet influence_set(const InfluenceField& field, double epsilon);

// Sum of p_hat^beta over observed edges.
double lp_sum(const InfluenceField& field, double beta);

// q_e = exp(-dist(e, generators) / log n), materialized where q >= floor.
struct SmoothEnvelope {
    std::map<Edge, double> values;
    double scale = 0;  // log n
    double floor = 0;

    double at(const Edge& e) const;
};

SmoothEnvelope smooth_envelope(const std::set<Edge>& generators, double n, double floor = 1e-6);

// R = (sum q_e p_e)^d / ((sum q_e^2)^{(d-1)/2} * sum q_e); bounded by a
// constant per the smooth-function inequality, reported across scales.
double proposition_ratio(const SmoothEnvelope& q, const InfluenceField& field, int d);

// Markov bound |A_eps| <= (sum p_hat) / eps on a grid of thresholds.
bool trivial_count_bound_check(const InfluenceField& field,
                               const std::vector<double>& eps_grid = {0.3, 0.2, 0.1, 0.05, 0.02});

}  // namespace fpp
