#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fpp/geodesic.hpp"
#include "fpp/influence.hpp"
#include "fpp/lattice.hpp"
#include "fpp/weights.hpp"

namespace fpp {

// Per-edge perturbation strengths with unit l2 norm.
struct TauField {
    std::map<Edge, double> values;
    double norm = 0;

    static TauField indicator(const std::set<Edge>& a);        // |A|^{-1/2} on A
    static TauField from_envelope(const SmoothEnvelope& q);    // q / |q|

    double at(const Edge& e) const;
};

// One sample of the coupling experiment: passage times from 0 to v and from
// h to v+h, in both the base and the perturbed environment, plus the f-sums
// the tail arguments run on.
struct CouplingRecord {
    Point h;
    uint64_t seed = 0;
    double T0 = 0, T0_plus = 0, Th = 0, Th_plus = 0;
    double Tplus_gamma0 = 0;     // gamma_0 priced in the plus environment
    double f_gamma0 = 0, f_gamma0_plus = 0, f_gammah = 0;
    double bdelta_gain = 0;      // delta0 * sum_{e in gamma_0^+, t_e in B} tau_e
    double delta0 = 0;
};

CouplingRecord run_coupling(const WeightDistribution& dist, const Point& v, const Point& h,
                            const TauField& tau, uint64_t seed, double delta0);

// Shares the (gamma_0, gamma_0^+) work across the h grid.
std::vector<CouplingRecord> run_coupling_batch(const WeightDistribution& dist, const Point& v,
                                               const std::vector<Point>& h_grid,
                                               const TauField& tau, uint64_t seed, double delta0);

// Names of the per-sample deterministic inequalities a record violates;
// empty means all hold.
std::vector<std::string> coupling_violations(const CouplingRecord& rec,
                                             const WeightDistribution& dist, double c0);

// f(p) = sum of tau over the path's edges.
double f_statistic(const Geodesic& g, const TauField& tau);

// mu = sum tau_e p_hat_e; equals the Monte Carlo mean of f(gamma_0) when the
// field and the f samples reuse the same trials.
double mu_estimate(const InfluenceField& field, const TauField& tau);

// Smallest k in {-1, ..., k_max} whose empirical tail satisfies
// P(f >= 3^k mu) >= 4^{-k-3}; nullopt if none does.
std::optional<int> dyadic_level_search(const std::vector<double>& f_samples, double mu, int k_max);
bool dyadic_level_qualifies(const std::vector<double>& f_samples, double mu, int k);

struct TailTransferRow {
    Point h;
    double c1 = 0;
    bool applicable = false;  // |h| < c1 * t
    double lhs = 0;           // P(f(gamma_h) >= c1 t)
    double rhs = 0;           // c1 * P(f(gamma_0) >= t)^{3/2}
    bool pass = false;
};

struct TailTransferTable {
    double t = 0;
    double p0_tail = 0;  // P(f(gamma_0) >= t)
    std::vector<TailTransferRow> rows;
    double best_c1 = 0;  // largest c1 passing for every applicable h; 0 if none
};

TailTransferTable tail_transfer_from_samples(const std::vector<double>& f0,
                                             const std::map<Point, std::vector<double>>& fh,
                                             double t, const std::vector<double>& c1_grid);

// Monte Carlo both tails with shared environments per trial.
TailTransferTable lemma_tail_transfer_check(const WeightDistribution& dist, const Point& v,
                                            double t, const std::vector<Point>& h_grid,
                                            uint64_t trials, uint64_t seed, const TauField& tau,
                                            int workers = 0);

}  // namespace fpp
