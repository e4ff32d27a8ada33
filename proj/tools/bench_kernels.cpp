// Benchmark: OpenMP trial kernels against their serial reference.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "fpp/influence.hpp"
#include "fpp/weights.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 48;
    uint64_t trials = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 400;
    auto dist = fpp::WeightDistribution::uniform(1.0, 2.0);
    fpp::Point v = fpp::Point::of({n, 0});

    std::printf("influence field, v=(%d,0), %llu trials\n", n, (unsigned long long)trials);

    auto t0 = std::chrono::steady_clock::now();
    auto serial = fpp::estimate_influence_reference(dist, v, trials, 1);
    double t_serial = seconds_since(t0);
    std::printf("  serial reference: %8.3f s (%.1f trials/s)\n", t_serial, trials / t_serial);

    for (int workers : {1, 2, omp_get_max_threads()}) {
        t0 = std::chrono::steady_clock::now();
        auto parallel = fpp::estimate_influence(dist, v, trials, 1, workers);
        double t_par = seconds_since(t0);
        bool identical = parallel.hits == serial.hits;
        std::printf("  openmp x%-2d      : %8.3f s (%.1f trials/s, speedup %.2fx, %s)\n", workers,
                    t_par, trials / t_par, t_serial / t_par,
                    identical ? "bit-identical" : "MISMATCH");
        if (!identical) return 1;
    }

    std::printf("mw sampler, 20-event battery margin check\n");
    auto events = fpp::mw_event_battery(dist, 2);
    auto tau = fpp::mw_battery_tau(2);
    for (int workers : {1, omp_get_max_threads()}) {
        t0 = std::chrono::steady_clock::now();
        double worst = 1e300;
        for (const auto& ev : events) {
            auto r = fpp::verify_mw_inequality(dist, tau, ev.pred, 2.0, 200000, 7, workers);
            if (r.margin_sigmas < worst) worst = r.margin_sigmas;
        }
        std::printf("  openmp x%-2d      : %8.3f s (worst margin %+.1f sigma)\n", workers,
                    seconds_since(t0), worst);
    }
    return 0;
}
