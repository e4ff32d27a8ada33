#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fpp/geodesic.hpp"
#include "fpp/lattice.hpp"
#include "fpp/weights.hpp"

namespace fpp {

// Vertices of g in the slab 0 <= (u, v_hat) <= ell whose distance to the
// line through 0 and v exceeds r. Boundary equalities count as inside the
// slab and inside the cylinder.
int outside_cylinder_count(const Geodesic& g, const Point& v, double ell, double r);

// Max over vertices of the distance to the line through 0 and v.
double max_transversal_deviation(const Geodesic& g, const Point& v);

// Median of the same distances over slab vertices; companion statistic for
// the exponent fits.
double median_transversal_deviation(const Geodesic& g, const Point& v, double ell);

struct ExponentFit {
    std::vector<std::pair<double, double>> pairs;
    double slope = 0;
    double intercept = 0;  // of log(statistic) vs log(scale)
    double r_squared = 0;
};

// OLS of log(statistic) on log(scale); needs >= 3 strictly positive pairs.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& pairs);

// Fraction of path edges whose weight lies in B_delta.
double path_density_check(const EdgeEnvironment& env, const std::vector<Edge>& path, double delta);

// Samples non-backtracking lattice walks of length k_min inside the box and
// counts those whose B_delta fraction falls below 1/2. A sampled probe of the
// Omega event; exhaustive enumeration is out of reach.
int omega_violation_scan(const EdgeEnvironment& env, const Box& region, int k_min, int samples,
                         double delta);

}  // namespace fpp
