#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fpp/lattice.hpp"
#include "fpp/rng.hpp"

namespace fpp {

// Weight distribution supported on [a, b] with density bounded below by
// alpha. Two built-in families; both have closed-form cdf and quantile.
class WeightDistribution {
public:
    enum class Family { Uniform, TruncatedLinear };

    static WeightDistribution uniform(double a, double b);
    // Density 1 + slope*(t - 1/2) in normalized coordinates, |slope| < 2.
    static WeightDistribution truncated_linear(double a, double b, double slope);
    static WeightDistribution from_name(const std::string& family, double a, double b,
                                        double slope = 0.0);

    double a() const { return a_; }
    double b() const { return b_; }
    double alpha() const { return alpha_; }
    Family family() const { return family_; }
    double slope() const { return slope_; }
    std::string name() const;

    double cdf(double x) const;
    double quantile(double u) const;
    double density(double x) const;
    double mean() const;

private:
    WeightDistribution(Family f, double a, double b, double slope);

    Family family_;
    double a_, b_, slope_, alpha_;
};

// Push-forward of the standard Gaussian: F = quantile(Phi(z)), an increasing
// Lipschitz map onto (a, b). pull_back clamps z to [-8, 8]; beyond that F is
// flat to double precision.
class GaussianRepresentation {
public:
    explicit GaussianRepresentation(const WeightDistribution& dist);

    const WeightDistribution& distribution() const { return dist_; }
    double push_forward(double z) const;            // F
    double pull_back(double w) const;               // F^-1, clamped
    double derivative(double z) const;              // F' = phi(z) / rho(F(z))
    double lipschitz() const { return c0_; }        // C0 >= sup F'

private:
    WeightDistribution dist_;
    double c0_;
};

// The increment F(z + tau) - F(z) computed so that the Lemma contracts
// w <= g <= min(b, w + C0*tau), and g >= w + delta*tau on B_delta, hold
// exactly in floating point.
double gplus_apply(const GaussianRepresentation& rep, double tau, double w);

class PerturbationMap {
public:
    PerturbationMap(GaussianRepresentation rep, double tau);

    double tau() const { return tau_; }
    const GaussianRepresentation& representation() const { return rep_; }
    double apply(double w) const;   // g+_tau(w)
    double invert(double y) const;  // numeric inverse, bisection to 1e-12

private:
    GaussianRepresentation rep_;
    double tau_;
};

inline double gplus(const PerturbationMap& map, double w) { return map.apply(w); }

// B_delta: weights on which every g+_tau gains at least delta*tau. Built as a
// single closed interval (empty when delta exceeds the attainable slope).
struct NiceSet {
    double delta = 0;
    bool empty = true;
    double lo = 0, hi = 0;

    bool contains(double w) const { return !empty && w >= lo && w <= hi; }
    double measure(const WeightDistribution& dist) const;
};

NiceSet nice_set(const GaussianRepresentation& rep, double delta);

// Largest delta on a bisection grid whose B_delta still has measure >= target.
double delta_for_measure(const GaussianRepresentation& rep, double target);

// Read-only view of edge weights; implementations are pure functions of the
// edge, safe to share across threads.
class EdgeWeightFn {
public:
    virtual ~EdgeWeightFn() = default;
    virtual double weight(const Edge& e) const = 0;
};

// The random environment (t_e): weight(e) is a pure function of
// (master_seed, canonical edge key).
class EdgeEnvironment : public EdgeWeightFn {
public:
    EdgeEnvironment(WeightDistribution dist, uint64_t master_seed, ConfinementRegion region);

    double weight(const Edge& e) const override {
        return dist_.quantile(uniform_from_key(master_seed_, edge_key(e)));
    }

    const WeightDistribution& distribution() const { return dist_; }
    uint64_t master_seed() const { return master_seed_; }
    const ConfinementRegion& region() const { return region_; }

private:
    WeightDistribution dist_;
    uint64_t master_seed_;
    ConfinementRegion region_;
};

inline double sample_weight(const EdgeEnvironment& env, const Edge& e) { return env.weight(e); }

// Lazy view t+_e = g+_{tau_e}(t_e); edges with tau_e = 0 (or absent) pass
// through bit-identically. Holds references: base and tau_field must outlive
// the view.
class PerturbedEnvironment : public EdgeWeightFn {
public:
    PerturbedEnvironment(const EdgeEnvironment& base, const std::map<Edge, double>& tau_field);

    double weight(const Edge& e) const override;
    const std::map<Edge, double>& tau_field() const { return tau_; }
    const GaussianRepresentation& representation() const { return rep_; }

private:
    const EdgeEnvironment& base_;
    const std::map<Edge, double>& tau_;
    GaussianRepresentation rep_;
    Box support_box_;  // prefilter: edges outside carry tau = 0
    bool has_support_ = false;
};

PerturbedEnvironment perturb_environment(const EdgeEnvironment& env,
                                         const std::map<Edge, double>& tau_field);

// weight(e) = base(e + shift): the environment seen from a translated frame.
class TranslatedEnvironment : public EdgeWeightFn {
public:
    TranslatedEnvironment(const EdgeWeightFn& base, Point shift) : base_(base), shift_(shift) {}
    double weight(const Edge& e) const override { return base_.weight(e.translated(shift_)); }

private:
    const EdgeWeightFn& base_;
    Point shift_;
};

// --- Mermin-Wagner probability estimate -----------------------------------

using EventPredicate = std::function<bool(std::span<const double>)>;

struct MwCheckResult {
    double lhs = 0;           // P((g+_{tau_1}(X_1), ...) in A)
    double rhs = 0;           // exp(-p|tau|^2 / (2(p-1))) * P(X in A)^p
    double margin_sigmas = 0; // (lhs - rhs) in estimated standard deviations
};

// Common-random-number Monte Carlo check of the probability transfer
// estimate. The coupling samples z ~ N(0,1)^n once and evaluates the event on
// (F(z_i)) and (F(z_i + tau_i)).
MwCheckResult verify_mw_inequality(const WeightDistribution& dist,
                                   const std::vector<double>& tau,
                                   const EventPredicate& event, double p,
                                   uint64_t samples, uint64_t seed, int workers = 0);

struct MwEvent {
    std::string name;
    EventPredicate pred;
};

// Fixed battery of 20 events (half-spaces, boxes, unions) on [a,b]^n used by
// the property tests and the validate experiment.
std::vector<MwEvent> mw_event_battery(const WeightDistribution& dist, int n);

// Deterministic tau vector for the battery runs.
std::vector<double> mw_battery_tau(int n);

}  // namespace fpp
