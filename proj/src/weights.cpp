#include "fpp/weights.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fpp/stats.hpp"

namespace fpp {

namespace {
constexpr double kZClamp = 8.0;
}

// --- WeightDistribution ----------------------------------------------------

WeightDistribution::WeightDistribution(Family f, double a, double b, double slope)
    : family_(f), a_(a), b_(b), slope_(slope) {
    if (!(0 < a && a < b)) throw std::invalid_argument("WeightDistribution: requires 0 < a < b");
    switch (family_) {
        case Family::Uniform:
            alpha_ = 1.0 / (b - a);
            break;
        case Family::TruncatedLinear:
            if (std::abs(slope) >= 2)
                throw std::invalid_argument("WeightDistribution: |slope| must be < 2");
            alpha_ = (1.0 - std::abs(slope) / 2.0) / (b - a);
            break;
    }
}

WeightDistribution WeightDistribution::uniform(double a, double b) {
    return WeightDistribution(Family::Uniform, a, b, 0.0);
}

WeightDistribution WeightDistribution::truncated_linear(double a, double b, double slope) {
    return WeightDistribution(Family::TruncatedLinear, a, b, slope);
}

WeightDistribution WeightDistribution::from_name(const std::string& family, double a, double b,
                                                 double slope) {
    if (family == "uniform") return uniform(a, b);
    if (family == "truncated_linear") return truncated_linear(a, b, slope);
    throw std::invalid_argument("WeightDistribution: unknown family '" + family + "'");
}

std::string WeightDistribution::name() const {
    return family_ == Family::Uniform ? "uniform" : "truncated_linear";
}

double WeightDistribution::cdf(double x) const {
    if (x <= a_) return 0;
    if (x >= b_) return 1;
    double t = (x - a_) / (b_ - a_);
    switch (family_) {
        case Family::Uniform:
            return t;
        case Family::TruncatedLinear:
            return t + slope_ * t * (t - 1) / 2;
    }
    return t;
}

double WeightDistribution::quantile(double u) const {
    if (u <= 0) return a_;
    if (u >= 1) return b_;
    double t = u;
    if (family_ == Family::TruncatedLinear && slope_ != 0) {
        double h = 1 - slope_ / 2;
        t = (-h + std::sqrt(h * h + 2 * slope_ * u)) / slope_;
    }
    return a_ + (b_ - a_) * t;
}

double WeightDistribution::density(double x) const {
    if (x < a_ || x > b_) return 0;
    double t = (x - a_) / (b_ - a_);
    switch (family_) {
        case Family::Uniform:
            return 1.0 / (b_ - a_);
        case Family::TruncatedLinear:
            return (1 + slope_ * (t - 0.5)) / (b_ - a_);
    }
    return 0;
}

double WeightDistribution::mean() const {
    switch (family_) {
        case Family::Uniform:
            return 0.5 * (a_ + b_);
        case Family::TruncatedLinear:
            // E[t] = 1/2 + slope/12 in normalized coordinates.
            return a_ + (b_ - a_) * (0.5 + slope_ / 12.0);
    }
    return 0;
}

// --- GaussianRepresentation ------------------------------------------------

GaussianRepresentation::GaussianRepresentation(const WeightDistribution& dist) : dist_(dist) {
    // C0 = sup F' over a z-grid, rounded up 5%.
    double sup = 0;
    for (int i = 0; i <= 1024; ++i) {
        double z = -kZClamp + i * (2 * kZClamp / 1024.0);
        sup = std::max(sup, derivative(z));
    }
    c0_ = 1.05 * sup;
}

double GaussianRepresentation::push_forward(double z) const {
    return dist_.quantile(normal_cdf(z));
}

double GaussianRepresentation::pull_back(double w) const {
    double u = dist_.cdf(w);
    if (u <= 0) return -kZClamp;
    if (u >= 1) return kZClamp;
    return std::clamp(normal_quantile(u), -kZClamp, kZClamp);
}

double GaussianRepresentation::derivative(double z) const {
    double rho = dist_.density(push_forward(z));
    if (rho <= 0) return 0;
    return normal_pdf(z) / rho;
}

// --- g+ --------------------------------------------------------------------

double gplus_apply(const GaussianRepresentation& rep, double tau, double w) {
    const double a = rep.distribution().a(), b = rep.distribution().b();
    if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("gplus: tau must be in [0, 1]");
    if (!(w >= a && w <= b)) throw std::invalid_argument("gplus: w must be in [a, b]");
    if (tau == 0) return w;
    double z = rep.pull_back(w);
    double delta;
    if (tau < 1e-6) {
        // Direct differences lose all precision here; the midpoint derivative
        // is accurate to O(tau^2) relative.
        delta = tau * rep.derivative(z + 0.5 * tau);
    } else {
        delta = rep.push_forward(z + tau) - rep.push_forward(z);
    }
    delta = std::clamp(delta, 0.0, rep.lipschitz() * tau);
    return std::min(b, w + delta);
}

PerturbationMap::PerturbationMap(GaussianRepresentation rep, double tau)
    : rep_(std::move(rep)), tau_(tau) {
    if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("PerturbationMap: tau must be in [0, 1]");
}

double PerturbationMap::apply(double w) const { return gplus_apply(rep_, tau_, w); }

double PerturbationMap::invert(double y) const {
    const double a = rep_.distribution().a(), b = rep_.distribution().b();
    if (!(y >= a && y <= b)) throw std::invalid_argument("PerturbationMap: y must be in [a, b]");
    double lo = a, hi = y;  // g(w) >= w, so the preimage is at most y
    for (int i = 0; i < 64 && hi - lo > 1e-13; ++i) {
        double mid = 0.5 * (lo + hi);
        if (apply(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// --- NiceSet ----------------------------------------------------------------

namespace {

// Conservative lower bound for inf of F' over [z, z+1]. The uniform family
// has a unimodal F', so the endpoint minimum is exact; other families get a
// grid minimum with a discretization allowance subtracted.
double inf_derivative(const GaussianRepresentation& rep, double z) {
    if (rep.distribution().family() == WeightDistribution::Family::Uniform)
        return std::min(rep.derivative(z), rep.derivative(z + 1));
    constexpr int kGrid = 64;
    double mn = std::numeric_limits<double>::infinity();
    double max_step = 0;
    double prev = rep.derivative(z);
    for (int i = 1; i <= kGrid; ++i) {
        double cur = rep.derivative(z + double(i) / kGrid);
        mn = std::min(mn, std::min(prev, cur));
        max_step = std::max(max_step, std::abs(cur - prev));
        prev = cur;
    }
    return mn - max_step;
}

}  // namespace

NiceSet nice_set(const GaussianRepresentation& rep, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("nice_set: delta must be positive");
    NiceSet set;
    set.delta = delta;

    const double z_lo = -kZClamp, z_hi = kZClamp - 1;
    constexpr int kScan = 128;
    double best_z = z_lo, best_m = -1;
    for (int i = 0; i <= kScan; ++i) {
        double z = z_lo + i * (z_hi - z_lo) / kScan;
        double m = inf_derivative(rep, z);
        if (m > best_m) {
            best_m = m;
            best_z = z;
        }
    }
    if (best_m < delta) return set;  // empty; valid with G(B_delta) = 0

    auto bisect = [&](double inside, double outside) {
        for (int i = 0; i < 64 && std::abs(outside - inside) > 1e-13; ++i) {
            double mid = 0.5 * (inside + outside);
            if (inf_derivative(rep, mid) >= delta)
                inside = mid;
            else
                outside = mid;
        }
        return inside;
    };
    double z_left = inf_derivative(rep, z_lo) >= delta ? z_lo : bisect(best_z, z_lo);
    double z_right = inf_derivative(rep, z_hi) >= delta ? z_hi : bisect(best_z, z_hi);

    // Shrink inward so that membership implies the gain inequality with a
    // margin clear of floating-point noise.
    set.lo = rep.push_forward(z_left) + 1e-9;
    set.hi = rep.push_forward(z_right) - 1e-9;
    set.empty = !(set.lo < set.hi);
    return set;
}

double NiceSet::measure(const WeightDistribution& dist) const {
    if (empty) return 0;
    return std::max(0.0, dist.cdf(hi) - dist.cdf(lo));
}

double delta_for_measure(const GaussianRepresentation& rep, double target) {
    if (!(target > 0 && target < 1))
        throw std::invalid_argument("delta_for_measure: target must be in (0, 1)");
    double lo = 0, hi = rep.lipschitz();
    for (int i = 0; i < 50; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= 0) break;
        if (nice_set(rep, mid).measure(rep.distribution()) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

// --- environments ------------------------------------------------------------

EdgeEnvironment::EdgeEnvironment(WeightDistribution dist, uint64_t master_seed,
                                 ConfinementRegion region)
    : dist_(std::move(dist)), master_seed_(master_seed), region_(std::move(region)) {}

PerturbedEnvironment::PerturbedEnvironment(const EdgeEnvironment& base,
                                           const std::map<Edge, double>& tau_field)
    : base_(base), tau_(tau_field), rep_(base.distribution()) {
    for (const auto& [e, t] : tau_) {
        if (!(t >= 0 && t <= 1))
            throw std::invalid_argument("perturb_environment: tau must be in [0, 1]");
        if (!has_support_) {
            support_box_.lo = e.base;
            support_box_.hi = e.base;
            has_support_ = true;
        } else {
            for (int i = 0; i < e.base.dim; ++i) {
                support_box_.lo.c[i] = std::min(support_box_.lo.c[i], e.base.c[i]);
                support_box_.hi.c[i] = std::max(support_box_.hi.c[i], e.base.c[i]);
            }
        }
    }
}

double PerturbedEnvironment::weight(const Edge& e) const {
    double w = base_.weight(e);
    if (!has_support_ || !support_box_.contains(e.base)) return w;
    auto it = tau_.find(e);
    if (it == tau_.end() || it->second == 0) return w;
    return gplus_apply(rep_, it->second, w);
}

PerturbedEnvironment perturb_environment(const EdgeEnvironment& env,
                                         const std::map<Edge, double>& tau_field) {
    return PerturbedEnvironment(env, tau_field);
}

// --- Mermin-Wagner check ------------------------------------------------------

MwCheckResult verify_mw_inequality(const WeightDistribution& dist,
                                   const std::vector<double>& tau,
                                   const EventPredicate& event, double p,
                                   uint64_t samples, uint64_t seed, int workers) {
    if (!(p > 1)) throw std::invalid_argument("verify_mw_inequality: p must be > 1");
    if (samples == 0) throw std::invalid_argument("verify_mw_inequality: samples must be positive");
    if (tau.empty()) throw std::invalid_argument("verify_mw_inequality: tau must be non-empty");
    for (double t : tau)
        if (!(t >= 0 && t <= 1))
            throw std::invalid_argument("verify_mw_inequality: tau components must be in [0, 1]");

    const int n = static_cast<int>(tau.size());
    GaussianRepresentation rep(dist);
    CounterStream stream(seed, 0x6d65726d696e5741ull);

    int nthreads = workers > 0 ? workers : omp_get_max_threads();
    uint64_t count_plus = 0, count_base = 0, count_both = 0;

#pragma omp parallel for schedule(static) num_threads(nthreads) \
    reduction(+ : count_plus, count_base, count_both)
    for (int64_t i = 0; i < int64_t(samples); ++i) {
        std::array<double, 16> x_base, x_plus;
        std::vector<double> xb_dyn, xp_dyn;
        double* xb = x_base.data();
        double* xp = x_plus.data();
        if (n > 16) {
            xb_dyn.resize(n);
            xp_dyn.resize(n);
            xb = xb_dyn.data();
            xp = xp_dyn.data();
        }
        for (int j = 0; j < n; ++j) {
            double z = normal_quantile(stream.uniform(uint64_t(i) * n + j));
            xb[j] = rep.push_forward(z);
            xp[j] = tau[j] == 0 ? xb[j] : rep.push_forward(z + tau[j]);
        }
        bool in_base = event(std::span<const double>(xb, size_t(n)));
        bool in_plus = event(std::span<const double>(xp, size_t(n)));
        count_base += in_base;
        count_plus += in_plus;
        count_both += in_base && in_plus;
    }

    double N = double(samples);
    double y_bar = double(count_plus) / N;   // lhs estimate
    double z_bar = double(count_base) / N;   // P(X in A) estimate
    double tau_norm2 = 0;
    for (double t : tau) tau_norm2 += t * t;
    double kappa = std::exp(-p * tau_norm2 / (2 * (p - 1)));

    MwCheckResult r;
    r.lhs = y_bar;
    r.rhs = kappa * std::pow(z_bar, p);

    // Delta-method variance of lhs - kappa*z_bar^p with the common-random-
    // number covariance term.
    double var_y = y_bar * (1 - y_bar) / N;
    double var_z = z_bar * (1 - z_bar) / N;
    double cov = (double(count_both) / N - y_bar * z_bar) / N;
    double grad = z_bar > 0 ? kappa * p * std::pow(z_bar, p - 1) : 0.0;
    double var_d = var_y + grad * grad * var_z - 2 * grad * cov;
    double diff = r.lhs - r.rhs;
    if (var_d <= 0) {
        r.margin_sigmas = diff >= 0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
    } else {
        r.margin_sigmas = diff / std::sqrt(var_d);
    }
    return r;
}

std::vector<MwEvent> mw_event_battery(const WeightDistribution& dist, int n) {
    if (n < 1) throw std::invalid_argument("mw_event_battery: n must be >= 1");
    auto q = [&dist](double t) { return dist.quantile(t); };

    std::vector<MwEvent> events;
    auto add = [&events](std::string name, EventPredicate pred) {
        events.push_back({std::move(name), std::move(pred)});
    };

    auto sum_of = [](std::span<const double> x) {
        double s = 0;
        for (double v : x) s += v;
        return s;
    };

    // Half-spaces on the coordinate sum at several thresholds.
    for (double t : {0.3, 0.5, 0.7}) {
        double thr = n * q(t);
        add("sum_ge_q" + std::to_string(int(t * 100)),
            [sum_of, thr](std::span<const double> x) { return sum_of(x) >= thr; });
    }
    // Half-spaces on the first coordinate.
    for (double t : {0.25, 0.5, 0.9}) {
        double thr = q(t);
        add("x0_ge_q" + std::to_string(int(t * 100)),
            [thr](std::span<const double> x) { return x[0] >= thr; });
    }
    // A decreasing event: pushed-up weights make it rarer.
    {
        double thr = q(0.3);
        add("x0_le_q30", [thr](std::span<const double> x) { return x[0] <= thr; });
    }
    // Weighted half-space.
    {
        double thr = 0;
        for (int j = 0; j < n; ++j) thr += q(0.6) / (j + 1);
        add("weighted_sum", [thr](std::span<const double> x) {
            double s = 0;
            for (size_t j = 0; j < x.size(); ++j) s += x[j] / double(j + 1);
            return s >= thr;
        });
    }
    // Boxes.
    auto add_box = [&](std::string name, double lo_t, double hi_t) {
        double lo = q(lo_t), hi = q(hi_t);
        add(std::move(name), [lo, hi](std::span<const double> x) {
            for (double v : x)
                if (v < lo || v > hi) return false;
            return true;
        });
    };
    add_box("box_10_90", 0.1, 0.9);
    add_box("box_25_75", 0.25, 0.75);
    add_box("box_lower_half", 0.0, 0.5);
    add_box("box_upper_half", 0.5, 1.0);
    {
        double lo = q(0.2), hi = q(0.4);
        add("x0_band_20_40",
            [lo, hi](std::span<const double> x) { return x[0] >= lo && x[0] <= hi; });
    }
    {
        double lo = q(0.35), hi = q(0.85);
        add("even_coords_band", [lo, hi](std::span<const double> x) {
            for (size_t j = 0; j < x.size(); j += 2)
                if (x[j] < lo || x[j] > hi) return false;
            return true;
        });
    }
    // Extremes.
    {
        double thr = q(0.95);
        add("max_ge_q95", [thr](std::span<const double> x) {
            for (double v : x)
                if (v >= thr) return true;
            return false;
        });
    }
    {
        double thr = q(0.05);
        add("min_ge_q05", [thr](std::span<const double> x) {
            for (double v : x)
                if (v < thr) return false;
            return true;
        });
    }
    // Unions.
    {
        double lo1 = q(0.05), hi1 = q(0.25), lo2 = q(0.75), hi2 = q(0.95);
        add("band_union", [lo1, hi1, lo2, hi2](std::span<const double> x) {
            double v = x[0];
            return (v >= lo1 && v <= hi1) || (v >= lo2 && v <= hi2);
        });
    }
    {
        double thr = q(0.8);
        double mid_lo = q(0.45), mid_hi = q(0.55);
        add("tail_or_center", [thr, mid_lo, mid_hi](std::span<const double> x) {
            if (x[0] >= thr) return true;
            for (double v : x)
                if (v < mid_lo || v > mid_hi) return false;
            return true;
        });
    }
    {
        double s_thr = n * q(0.65);
        double thr0 = q(0.15);
        add("sum_or_low_x0", [sum_of, s_thr, thr0](std::span<const double> x) {
            return sum_of(x) >= s_thr || x[0] <= thr0;
        });
    }
    // Coordinates agreeing on a side of the median.
    {
        double m = q(0.5);
        add("all_same_side", [m](std::span<const double> x) {
            bool side = x[0] >= m;
            for (size_t j = 1; j < x.size(); ++j)
                if ((x[j] >= m) != side) return false;
            return true;
        });
    }
    if (events.size() != 20) throw std::logic_error("mw_event_battery: expected 20 events");
    return events;
}

std::vector<double> mw_battery_tau(int n) {
    std::vector<double> tau(n);
    for (int j = 0; j < n; ++j) tau[j] = 0.2 + 0.5 * ((j * 2654435761u) % 97) / 96.0;
    return tau;
}

}  // namespace fpp
