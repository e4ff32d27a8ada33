#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace fpp {

double normal_pdf(double z);
double normal_cdf(double z);
// Inverse of normal_cdf on (0, 1); accurate to ~1e-15 after refinement.
double normal_quantile(double p);

struct WilsonInterval {
    double lo = 0;
    double hi = 1;
};

// Wilson score interval for a binomial proportion at z standard deviations
// (default 1.96 ~ 95%).
WilsonInterval wilson_interval(uint64_t hits, uint64_t trials, double z = 1.96);

struct MeanVar {
    double mean = 0;
    double var = 0;  // population variance
    uint64_t n = 0;
};

MeanVar mean_var(const std::vector<double>& xs);
double median(std::vector<double> xs);

}  // namespace fpp
