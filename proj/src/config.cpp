#include "banlin/config.hpp"

#include <fstream>
#include <set>

#include "banlin/errors.hpp"

namespace banlin {

namespace {

const std::set<std::string> kKnownKeys = {
    "setting", "d", "n", "num_experts", "seeds", "master_seed",
    "adversary", "fixed_z", "sequence_file", "rotate_omega",
    "finite_shape", "points_file", "experts_mode",
    "eta", "gamma", "strict_params", "ball_projection",
    "jobs", "out_dir"};

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        if (j.at(key).is_null()) return;
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
}

void read_optional(const nlohmann::json& j, const char* key, std::optional<double>& out) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    if (!j.at(key).is_number()) throw ConfigError(std::string("config: field '") + key + "' must be a number");
    out = j.at(key).get<double>();
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: root must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kKnownKeys.count(it.key())) throw ConfigError("config: unknown key '" + it.key() + "'");

    ExperimentConfig cfg;
    read_field(j, "setting", cfg.setting);
    read_field(j, "d", cfg.d);
    read_field(j, "n", cfg.n);
    read_field(j, "num_experts", cfg.num_experts);
    read_field(j, "seeds", cfg.seeds);
    read_field(j, "master_seed", cfg.master_seed);
    read_field(j, "adversary", cfg.adversary);
    read_field(j, "fixed_z", cfg.fixed_z);
    read_field(j, "sequence_file", cfg.sequence_file);
    read_field(j, "rotate_omega", cfg.rotate_omega);
    read_field(j, "finite_shape", cfg.finite_shape);
    read_field(j, "points_file", cfg.points_file);
    read_field(j, "experts_mode", cfg.experts_mode);
    read_optional(j, "eta", cfg.eta);
    read_optional(j, "gamma", cfg.gamma);
    read_field(j, "strict_params", cfg.strict_params);
    read_field(j, "ball_projection", cfg.ball_projection);
    read_field(j, "jobs", cfg.jobs);
    read_field(j, "out_dir", cfg.out_dir);

    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["setting"] = cfg.setting;
    j["d"] = cfg.d;
    j["n"] = cfg.n;
    j["num_experts"] = cfg.num_experts;
    j["seeds"] = cfg.seeds;
    j["master_seed"] = cfg.master_seed;
    j["adversary"] = cfg.adversary;
    j["fixed_z"] = cfg.fixed_z;
    j["sequence_file"] = cfg.sequence_file;
    j["rotate_omega"] = cfg.rotate_omega;
    j["finite_shape"] = cfg.finite_shape;
    j["points_file"] = cfg.points_file;
    j["experts_mode"] = cfg.experts_mode;
    if (cfg.eta) j["eta"] = *cfg.eta; else j["eta"] = nullptr;
    if (cfg.gamma) j["gamma"] = *cfg.gamma; else j["gamma"] = nullptr;
    j["strict_params"] = cfg.strict_params;
    j["ball_projection"] = cfg.ball_projection;
    j["jobs"] = cfg.jobs;
    j["out_dir"] = cfg.out_dir;
    return j;
}

void validate_config(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };

    if (cfg.setting != "finite" && cfg.setting != "hypercube" && cfg.setting != "ball" && cfg.setting != "experts")
        fail("setting must be finite | hypercube | ball | experts, got '" + cfg.setting + "'");
    if (cfg.d < 1) fail("d must be >= 1");
    if (cfg.n < 1) fail("n must be >= 1");
    if (cfg.seeds < 1) fail("seeds must be >= 1");
    if (cfg.jobs < 1) fail("jobs must be >= 1");
    if (cfg.num_experts < 0) fail("num_experts must be >= 0 (0 = derived from the suggestion generator)");

    const std::set<std::string> adversaries = {"fixed", "iid_l1_vertex", "iid_sphere", "rotating",
                                               "sequence_file", "adaptive_worst"};
    if (!adversaries.count(cfg.adversary)) fail("unknown adversary '" + cfg.adversary + "'");
    if (cfg.adversary == "sequence_file" && cfg.sequence_file.empty()) fail("adversary sequence_file needs sequence_file");
    if (cfg.adversary == "rotating" && cfg.d < 2) fail("rotating adversary needs d >= 2");
    if (!cfg.fixed_z.empty() && static_cast<int>(cfg.fixed_z.size()) != cfg.d) fail("fixed_z must have d entries");

    if (cfg.setting == "finite") {
        if (cfg.finite_shape != "cross_polytope" && cfg.finite_shape != "hypercube_corners" && cfg.finite_shape != "file")
            fail("finite_shape must be cross_polytope | hypercube_corners | file");
        if (cfg.finite_shape == "file" && cfg.points_file.empty()) fail("finite_shape file needs points_file");
        if (cfg.finite_shape == "hypercube_corners" && cfg.d > 15)
            fail("hypercube_corners limited to d <= 15 (2^d actions)");
    }
    if (cfg.setting == "experts" && cfg.experts_mode != "fixed" && cfg.experts_mode != "rotating")
        fail("experts_mode must be fixed | rotating");

    if (cfg.eta && !(*cfg.eta > 0.0)) fail("eta override must be positive");
    if (cfg.gamma && !(*cfg.gamma >= 0.0 && *cfg.gamma < 1.0)) fail("gamma override must be in [0,1)");

    // Parameter preconditions are enforced against overrides only in strict
    // mode; the tuned defaults satisfy them by construction.
    if (cfg.strict_params && cfg.eta && cfg.gamma) {
        double ratio = *cfg.eta * cfg.d / std::max(*cfg.gamma, 1e-300);
        if (cfg.setting == "hypercube" && ratio > 0.5 + 1e-12)
            fail("strict: hypercube needs eta*d/gamma <= 1/2");
        if ((cfg.setting == "finite" || cfg.setting == "experts") && ratio > 1.0 + 1e-12)
            fail("strict: exponential weights need eta*d/gamma <= 1");
    }
    if (cfg.strict_params && cfg.setting == "ball" && cfg.eta && *cfg.eta * cfg.d > 0.5 + 1e-12)
        fail("strict: ball needs eta*d <= 1/2");
}

}  // namespace banlin
