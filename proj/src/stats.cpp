#include "fpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpp {

double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * M_SQRT1_2);
}

namespace {

// Acklam's rational approximation to the normal quantile, |error| < 1.15e-9,
// polished below with one Halley step against erfc.
double acklam(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    static const double p_low = 0.02425;

    if (p < p_low) {
        double q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p <= 1 - p_low) {
        double q = p - 0.5, r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    }
    double q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0 && p < 1)) {
        if (p == 0) return -INFINITY;
        if (p == 1) return INFINITY;
        throw std::invalid_argument("normal_quantile: p must be in [0, 1]");
    }
    double x = acklam(p);
    double e = normal_cdf(x) - p;
    double u = e / normal_pdf(x);
    x -= u / (1 + 0.5 * x * u);  // Halley
    return x;
}

WilsonInterval wilson_interval(uint64_t hits, uint64_t trials, double z) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be positive");
    double n = double(trials);
    double phat = double(hits) / n;
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (phat + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
    WilsonInterval w;
    w.lo = std::max(0.0, center - half);
    w.hi = std::min(1.0, center + half);
    return w;
}

MeanVar mean_var(const std::vector<double>& xs) {
    MeanVar mv;
    mv.n = xs.size();
    if (xs.empty()) return mv;
    double s = 0;
    for (double x : xs) s += x;
    mv.mean = s / double(xs.size());
    double v = 0;
    for (double x : xs) v += (x - mv.mean) * (x - mv.mean);
    mv.var = v / double(xs.size());
    return mv;
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median: empty input");
    size_t m = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + m, xs.end());
    double hi = xs[m];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + m - 1, xs.end());
    return 0.5 * (xs[m - 1] + hi);
}

}  // namespace fpp
