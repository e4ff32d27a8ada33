#pragma once

#include <map>
#include <string>
#include <vector>

#include "fpp/config.hpp"
#include "fpp/influence.hpp"

namespace fpp {

// One experiment's deterministic outputs: artifact name -> exact bytes.
// Fixed (config, seed) reproduce these byte-identically; wall-clock time is
// reported separately so it never contaminates the artifacts.
struct RunOutcome {
    int exit_code = 0;  // 0 ok, 1 deterministic invariant failed
    std::map<std::string, std::string> artifacts;
    std::vector<std::string> log_lines;  // human-readable pass/fail summary
    double wall_seconds = 0;
};

RunOutcome run_experiment(const ExperimentConfig& cfg);

// Writes artifacts into out_dir plus timing.json and run.log.
void write_outcome(const RunOutcome& outcome, const std::string& out_dir);

// Influence runs are merged at the field level; disjoint contiguous seed
// ranges reproduce the monolithic run exactly.
struct InfluenceRun {
    ExperimentConfig cfg;
    InfluenceField field;
};

InfluenceRun run_influence_field(const ExperimentConfig& cfg);
InfluenceRun merge_influence_runs(std::vector<InfluenceRun> runs);
RunOutcome render_influence(const InfluenceRun& run);

}  // namespace fpp
