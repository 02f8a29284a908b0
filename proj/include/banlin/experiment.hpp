#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "banlin/config.hpp"
#include "banlin/env.hpp"

// Experiment runner behind the CLI: wires a configuration into an
// environment and policy, fans the replicates out over a worker pool,
// writes the per-round CSV and the report JSON, and evaluates the regret
// bound check. Replicate k draws from RngStream::replicate(master_seed, k);
// aggregation is ordered by seed index, so outputs are byte-identical
// across runs regardless of the job count.

namespace banlin {

struct ExperimentResult {
    RegretReport report;
    nlohmann::json report_json;
    std::string csv_path;     // empty when write_files is false
    std::string report_path;
    bool pass_bound = false;
    std::vector<std::string> warnings;
};

// CSV columns: seed,t,exploration_flag,realized_loss,cum_loss,cum_pseudo_regret
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true);

// The CSV body as written (exposed for determinism checks).
std::string render_rounds_csv(const ExperimentConfig& cfg);

}  // namespace banlin
