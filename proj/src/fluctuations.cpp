#include "fpp/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpp/rng.hpp"
#include "fpp/stats.hpp"

namespace fpp {

int outside_cylinder_count(const Geodesic& g, const Point& v, double ell, double r) {
    double nv = l2_norm(v);
    if (nv == 0) throw std::invalid_argument("outside_cylinder_count: v must be nonzero");
    if (!(ell > 0)) throw std::invalid_argument("outside_cylinder_count: ell must be positive");
    if (!(r >= 0)) throw std::invalid_argument("outside_cylinder_count: r must be nonnegative");
    int count = 0;
    for (const Point& u : g.vertices) {
        double t = dot(u, v) / nv;
        if (t < 0 || t > ell) continue;
        if (line_distance(u, v) > r) ++count;
    }
    return count;
}

double max_transversal_deviation(const Geodesic& g, const Point& v) {
    if (l2_norm(v) == 0)
        throw std::invalid_argument("max_transversal_deviation: v must be nonzero");
    double mx = 0;
    for (const Point& u : g.vertices) mx = std::max(mx, line_distance(u, v));
    return mx;
}

double median_transversal_deviation(const Geodesic& g, const Point& v, double ell) {
    double nv = l2_norm(v);
    if (nv == 0) throw std::invalid_argument("median_transversal_deviation: v must be nonzero");
    std::vector<double> devs;
    for (const Point& u : g.vertices) {
        double t = dot(u, v) / nv;
        if (t < 0 || t > ell) continue;
        devs.push_back(line_distance(u, v));
    }
    if (devs.empty()) return 0;
    return median(std::move(devs));
}

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw std::invalid_argument("fit_exponent: need at least 3 pairs");
    ExponentFit fit;
    fit.pairs = pairs;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = double(pairs.size());
    for (const auto& [scale, stat] : pairs) {
        if (!(scale > 0 && stat > 0))
            throw std::invalid_argument("fit_exponent: pairs must be strictly positive");
        double x = std::log(scale), y = std::log(stat);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double vxx = sxx - sx * sx / n;
    double vxy = sxy - sx * sy / n;
    double vyy = syy - sy * sy / n;
    if (vxx == 0) throw std::invalid_argument("fit_exponent: scales are all equal");
    fit.slope = vxy / vxx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.r_squared = vyy == 0 ? 1.0 : (vxy * vxy) / (vxx * vyy);
    return fit;
}

double path_density_check(const EdgeEnvironment& env, const std::vector<Edge>& path,
                          double delta) {
    if (path.empty()) throw std::invalid_argument("path_density_check: empty path");
    if (!(delta > 0)) throw std::invalid_argument("path_density_check: delta must be positive");
    GaussianRepresentation rep(env.distribution());
    NiceSet b = nice_set(rep, delta);
    int in = 0;
    for (const Edge& e : path)
        if (b.contains(env.weight(e))) ++in;
    return double(in) / double(path.size());
}

int omega_violation_scan(const EdgeEnvironment& env, const Box& region, int k_min, int samples,
                         double delta) {
    if (k_min < 1) throw std::invalid_argument("omega_violation_scan: k_min must be >= 1");
    if (samples < 1) throw std::invalid_argument("omega_violation_scan: samples must be >= 1");
    GaussianRepresentation rep(env.distribution());
    NiceSet b = nice_set(rep, delta);

    const int d = region.lo.dim;
    const int ndirs = 2 * d;
    CounterStream stream(env.master_seed(), 0x6f6d6567612d7363ull);

    int violations = 0;
    uint64_t ctr = 0;
    for (int s = 0; s < samples; ++s) {
        Point p = Point::zero(d);
        for (int i = 0; i < d; ++i) {
            int64_t extent = int64_t(region.hi.c[i]) - region.lo.c[i] + 1;
            p.c[i] = region.lo.c[i] + int32_t(stream.bits(ctr++) % uint64_t(extent));
        }
        int in_b = 0;
        int last_dir = -1;
        for (int step_i = 0; step_i < k_min; ++step_i) {
            int dir;
            Point q = p;
            do {
                dir = int(stream.bits(ctr++) % uint64_t(ndirs));
                q = p;
                q.c[dir >> 1] += (dir & 1) ? -1 : +1;
            } while ((last_dir >= 0 && dir == (last_dir ^ 1)) || !region.contains(q));
            Edge e;
            e.axis = static_cast<int8_t>(dir >> 1);
            e.base = (dir & 1) ? q : p;
            if (b.contains(env.weight(e))) ++in_b;
            p = q;
            last_dir = dir;
        }
        if (2 * in_b < k_min) ++violations;
    }
    return violations;
}

}  // namespace fpp
