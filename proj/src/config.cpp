#include "fpp/config.hpp"

#include <cmath>
#include <set>

#include "json.hpp"

namespace fpp {

using nlohmann::json;

WeightDistribution DistributionConfig::build() const {
    try {
        return WeightDistribution::from_name(family, a, b, slope);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("$.distribution: ") + e.what());
    }
}

Point ExperimentConfig::target() const {
    if (v.empty()) throw ConfigError("$.v: target vertex required for this experiment");
    Point p = Point::zero(d);
    for (int i = 0; i < d; ++i) p.c[i] = v[i];
    return p;
}

std::vector<Point> ExperimentConfig::h_points() const {
    std::vector<Point> out;
    for (const auto& h : h_grid) {
        Point p = Point::zero(d);
        for (int i = 0; i < d; ++i) p.c[i] = h[i];
        out.push_back(p);
    }
    return out;
}

namespace {

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (const json* f = find(j, key)) {
        try {
            out = f->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("$.") + key + ": wrong type");
        }
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& kind) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("$: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("$: config must be a JSON object");

    static const std::set<std::string> known = {
        "kind",         "d",           "v",          "n_grid",       "distribution",
        "trials",       "master_seed", "epsilon_grid", "beta_grid",  "radius_coeffs",
        "h_grid",       "tau",         "ratio_epsilon", "delta0_target", "envelope_floor",
        "mw_samples",   "workers",     "out_dir",    "k_max"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError("$." + it.key() + ": unknown field");

    ExperimentConfig cfg;
    cfg.kind = kind;
    if (const json* f = find(j, "kind")) {
        std::string file_kind = f->get<std::string>();
        if (!kind.empty() && file_kind != kind)
            throw ConfigError("$.kind: '" + file_kind + "' does not match subcommand '" + kind + "'");
        cfg.kind = file_kind;
    }

    read_into(j, "d", cfg.d);
    read_into(j, "v", cfg.v);
    read_into(j, "n_grid", cfg.n_grid);
    read_into(j, "trials", cfg.trials);
    read_into(j, "master_seed", cfg.master_seed);
    read_into(j, "epsilon_grid", cfg.epsilon_grid);
    read_into(j, "beta_grid", cfg.beta_grid);
    read_into(j, "radius_coeffs", cfg.radius_coeffs);
    read_into(j, "h_grid", cfg.h_grid);
    read_into(j, "ratio_epsilon", cfg.ratio_epsilon);
    read_into(j, "delta0_target", cfg.delta0_target);
    read_into(j, "envelope_floor", cfg.envelope_floor);
    read_into(j, "mw_samples", cfg.mw_samples);
    read_into(j, "workers", cfg.workers);
    read_into(j, "out_dir", cfg.out_dir);
    read_into(j, "k_max", cfg.k_max);

    if (const json* dj = find(j, "distribution")) {
        if (!dj->is_object()) throw ConfigError("$.distribution: must be an object");
        read_into(*dj, "family", cfg.distribution.family);
        read_into(*dj, "a", cfg.distribution.a);
        read_into(*dj, "b", cfg.distribution.b);
        read_into(*dj, "slope", cfg.distribution.slope);
    }
    if (const json* tj = find(j, "tau")) {
        if (!tj->is_object()) throw ConfigError("$.tau: must be an object");
        read_into(*tj, "type", cfg.tau.type);
        read_into(*tj, "epsilon", cfg.tau.epsilon);
        read_into(*tj, "trials", cfg.tau.trials);
    }

    if (cfg.radius_coeffs.empty())
        for (int k = -6; k <= 9; ++k) cfg.radius_coeffs.push_back(std::pow(2.0, k / 3.0));

    validate_config(cfg);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    static const std::set<std::string> kinds = {"influence", "fluctuation", "coupling", "ratio",
                                                "validate"};
    if (!kinds.count(cfg.kind)) throw ConfigError("$.kind: unknown experiment '" + cfg.kind + "'");
    if (cfg.d < 2 || cfg.d > kMaxDim) throw ConfigError("$.d: must be in [2, 4]");
    if (cfg.trials == 0) throw ConfigError("$.trials: must be positive");
    if (!cfg.v.empty() && int(cfg.v.size()) != cfg.d)
        throw ConfigError("$.v: must have exactly d coordinates");
    for (int n : cfg.n_grid)
        if (n < 2) throw ConfigError("$.n_grid: scales must be at least 2");
    cfg.distribution.build();  // validates family and parameters
    if (cfg.epsilon_grid.empty()) throw ConfigError("$.epsilon_grid: must be non-empty");
    for (double e : cfg.epsilon_grid)
        if (!(e > 0 && e <= 1)) throw ConfigError("$.epsilon_grid: entries must be in (0, 1]");
    for (double b : cfg.beta_grid)
        if (!(b >= 1)) throw ConfigError("$.beta_grid: entries must be >= 1");
    for (double c : cfg.radius_coeffs)
        if (!(c > 0)) throw ConfigError("$.radius_coeffs: entries must be positive");
    for (const auto& h : cfg.h_grid)
        if (int(h.size()) != cfg.d) throw ConfigError("$.h_grid: entries must have d coordinates");
    if (cfg.tau.type != "envelope" && cfg.tau.type != "indicator")
        throw ConfigError("$.tau.type: must be 'envelope' or 'indicator'");
    if (!(cfg.tau.epsilon > 0 && cfg.tau.epsilon <= 1))
        throw ConfigError("$.tau.epsilon: must be in (0, 1]");
    if (cfg.tau.trials == 0) throw ConfigError("$.tau.trials: must be positive");
    if (!(cfg.ratio_epsilon > 0 && cfg.ratio_epsilon <= 1))
        throw ConfigError("$.ratio_epsilon: must be in (0, 1]");
    if (!(cfg.delta0_target > 0 && cfg.delta0_target < 1))
        throw ConfigError("$.delta0_target: must be in (0, 1)");
    if (!(cfg.envelope_floor > 0 && cfg.envelope_floor < 1))
        throw ConfigError("$.envelope_floor: must be in (0, 1)");
    if (cfg.mw_samples == 0) throw ConfigError("$.mw_samples: must be positive");
    if (cfg.workers < 0) throw ConfigError("$.workers: must be nonnegative");
    if (cfg.k_max < 0) throw ConfigError("$.k_max: must be nonnegative");
    if (cfg.out_dir.empty()) throw ConfigError("$.out_dir: must be non-empty");

    bool needs_v = cfg.kind == "influence" || cfg.kind == "coupling";
    if (needs_v && cfg.v.empty()) throw ConfigError("$.v: required for this experiment");
    bool needs_grid = cfg.kind == "fluctuation" || cfg.kind == "ratio";
    if (needs_grid && cfg.n_grid.empty() && cfg.v.empty())
        throw ConfigError("$.n_grid: required for this experiment");
}

}  // namespace fpp
