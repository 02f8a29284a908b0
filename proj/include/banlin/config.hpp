#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "banlin/linalg.hpp"

namespace banlin {

// Flat experiment description; JSON file keys match field names and
// command-line flags override file values. eta/gamma left unset resolve to
// the policy's tuned formulas at wiring time, and the resolved report
// records whether each came from the default or an override.
struct ExperimentConfig {
    std::string setting = "ball";  // finite | hypercube | ball | experts
    int d = 2;
    long n = 1000;
    long num_experts = 0;          // experts setting
    int seeds = 1;
    std::uint64_t master_seed = 1;

    std::string adversary = "fixed";  // fixed | iid_l1_vertex | iid_sphere | rotating | sequence_file | adaptive_worst
    std::vector<double> fixed_z;      // empty: a canonical feasible default
    std::string sequence_file;
    double rotate_omega = 0.00628318530717958648;  // 2 pi / 1000

    std::string finite_shape = "cross_polytope";  // cross_polytope | hypercube_corners | file
    std::string points_file;
    std::string experts_mode = "fixed";  // fixed | rotating

    std::optional<double> eta;
    std::optional<double> gamma;
    bool strict_params = false;
    bool ball_projection = false;

    int jobs = 1;
    std::string out_dir = ".";

    bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates; unknown keys and malformed values raise ConfigError
// naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

void validate_config(const ExperimentConfig& cfg);

}  // namespace banlin
