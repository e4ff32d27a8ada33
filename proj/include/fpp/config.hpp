#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpp/lattice.hpp"
#include "fpp/weights.hpp"

namespace fpp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DistributionConfig {
    std::string family = "uniform";
    double a = 1.0;
    double b = 2.0;
    double slope = 0.0;

    WeightDistribution build() const;
};

struct TauSpec {
    std::string type = "envelope";  // "envelope" or "indicator"
    double epsilon = 0.05;
    uint64_t trials = 2000;  // trials for the generating influence field
};

struct ExperimentConfig {
    std::string kind;
    int d = 2;
    std::vector<int32_t> v;       // target vertex; defaults to (n, 0, ...) from n_grid
    std::vector<int> n_grid;      // scales for fluctuation / ratio experiments
    DistributionConfig distribution;
    uint64_t trials = 10000;
    uint64_t master_seed = 1;
    std::vector<double> epsilon_grid = {0.3, 0.2, 0.1, 0.05, 0.02};
    std::vector<double> beta_grid = {1.0, 1.5, 2.0, 3.0, 4.0};
    std::vector<double> radius_coeffs;  // r = c * n^{1/(d+1)}
    std::vector<std::vector<int32_t>> h_grid = {{0, 1}, {0, 4}, {4, 0}};
    TauSpec tau;
    double ratio_epsilon = 0.05;
    double delta0_target = 0.95;  // G(B_delta0) target for coupling runs
    double envelope_floor = 1e-6;
    uint64_t mw_samples = 100000;  // validate battery sample count
    int workers = 0;               // 0: all available
    std::string out_dir = "out";
    int k_max = 0;  // 0: ceil(log |v|)

    Point target() const;
    std::vector<Point> h_points() const;
};

// Parses and validates; error messages carry the JSON path of the offending
// field. kind comes from the CLI subcommand and must match the file's "kind"
// when present.
ExperimentConfig parse_config(const std::string& json_text, const std::string& kind);

void validate_config(const ExperimentConfig& cfg);

}  // namespace fpp
