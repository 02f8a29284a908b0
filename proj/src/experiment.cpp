#include "banlin/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "banlin/ball.hpp"
#include "banlin/csv.hpp"
#include "banlin/errors.hpp"
#include "banlin/exp2.hpp"
#include "banlin/hypercube.hpp"

namespace banlin {

namespace {

namespace fs = std::filesystem;

struct SeedOutcome {
    std::vector<RoundRecord> records;
    std::vector<Vec> losses;
    Vec prefix_best;  // best fixed comparator value after each prefix
    double certificate = 0.0;
};

struct Wiring {
    ActionSet set;
    std::shared_ptr<Adversary> adversary;
    BoundKind bound = BoundKind::ball;
    long num_actions = 0;
    double eta = 0.0;
    double gamma = 0.0;
    std::string eta_source = "default";
    std::string gamma_source = "default";
    bool clamped = false;
    std::shared_ptr<const Exp2State> exp2_prototype;  // finite setting
    bool experts = false;
    std::vector<Vec> expert_base;
    std::vector<std::string> warnings;
};

Vec default_fixed_z(int d) { return basis_vector(d, 0, 1.0); }

ActionSet build_action_set(const ExperimentConfig& cfg) {
    if (cfg.setting == "hypercube") return ActionSet::hypercube(cfg.d);
    if (cfg.setting == "ball" || cfg.setting == "experts") return ActionSet::ball(cfg.d);
    if (cfg.finite_shape == "cross_polytope") return ActionSet::cross_polytope(cfg.d);
    if (cfg.finite_shape == "hypercube_corners") return ActionSet::hypercube_corners(cfg.d);
    std::vector<Vec> pts = load_csv_rows(cfg.points_file);
    if (pts.empty()) throw ConfigError("points_file '" + cfg.points_file + "' is empty");
    if (static_cast<int>(pts.front().size()) != cfg.d)
        throw ConfigError("points_file width does not match d");
    return ActionSet::finite(std::move(pts));
}

std::shared_ptr<Adversary> build_adversary(const ExperimentConfig& cfg, SetKind kind) {
    if (cfg.adversary == "fixed")
        return make_fixed_adversary(cfg.fixed_z.empty() ? default_fixed_z(cfg.d) : Vec(cfg.fixed_z));
    if (cfg.adversary == "iid_l1_vertex") return make_iid_l1_vertex_adversary(cfg.d);
    if (cfg.adversary == "iid_sphere") return make_iid_sphere_adversary(cfg.d);
    if (cfg.adversary == "rotating") return make_rotating_adversary(cfg.d, cfg.rotate_omega);
    if (cfg.adversary == "sequence_file") {
        std::vector<Vec> rows = load_csv_rows(cfg.sequence_file);
        if (!rows.empty() && static_cast<int>(rows.front().size()) != cfg.d)
            throw ConfigError("sequence_file width does not match d");
        return make_sequence_adversary(std::move(rows));
    }
    return make_adaptive_worst_adversary(kind);
}

std::vector<Vec> rotate_plane(const std::vector<Vec>& base, double angle) {
    std::vector<Vec> out = base;
    if (base.front().size() < 2) return out;
    double c = std::cos(angle), s = std::sin(angle);
    for (Vec& v : out) {
        double x = v[0], y = v[1];
        v[0] = c * x - s * y;
        v[1] = s * x + c * y;
    }
    return out;
}

Wiring resolve(const ExperimentConfig& cfg, const Environment& env) {
    Wiring w;
    w.set = env.set();
    w.eta = cfg.eta.value_or(0.0);
    w.gamma = cfg.gamma.value_or(0.0);
    if (cfg.eta) w.eta_source = "override";
    if (cfg.gamma) w.gamma_source = "override";

    if (cfg.setting == "finite") {
        w.bound = BoundKind::exp2_john;
        auto pre = std::make_shared<const PreprocessedActions>(*env.preprocessed());
        w.num_actions = static_cast<long>(pre->actions.size());
        Exp2State proto = cfg.eta || cfg.gamma
                              ? [&] {
                                    JohnExploration john = john_weights(*pre);
                                    Vec mu(pre->actions.size(), 0.0);
                                    for (size_t k = 0; k < john.action_indices.size(); ++k)
                                        mu[static_cast<size_t>(john.action_indices[k])] += john.weights[k];
                                    Exp2State base = exp2_init(pre, cfg.n, false);
                                    double eta = cfg.eta.value_or(base.eta);
                                    double gamma = cfg.gamma.value_or(base.gamma);
                                    return exp2_make_state(pre, std::move(mu), eta, gamma, !cfg.strict_params);
                                }()
                              : exp2_init(pre, cfg.n, cfg.strict_params);
        w.eta = proto.eta;
        w.gamma = proto.gamma;
        w.clamped = proto.clamped;
        if (proto.clamped) w.warnings.push_back("exp2 defaults clamped to gamma = 1/2 (horizon too small for the tuned formula)");
        w.exp2_prototype = std::make_shared<const Exp2State>(std::move(proto));
    } else if (cfg.setting == "hypercube") {
        w.bound = BoundKind::hypercube;
        w.num_actions = 1L << std::min(cfg.d, 62);
        HyperParams p = hyper_params(cfg.n, cfg.d, cfg.strict_params && !cfg.eta && !cfg.gamma);
        w.eta = cfg.eta.value_or(p.eta);
        w.gamma = cfg.gamma.value_or(p.gamma);
        w.clamped = p.clamped && !cfg.eta && !cfg.gamma;
        if (w.clamped) w.warnings.push_back("hypercube defaults clamped to gamma = 1/2 (horizon too small for the tuned formula)");
        double ratio = w.eta * cfg.d / std::max(w.gamma, 1e-300);
        if (ratio > 0.5 + 1e-9) {
            if (cfg.strict_params) throw ConfigError("hypercube parameters violate eta*d/gamma <= 1/2");
            w.warnings.push_back("hypercube parameters violate eta*d/gamma <= 1/2; estimates may trip the range guard");
        }
    } else if (cfg.setting == "ball") {
        w.bound = BoundKind::ball;
        w.num_actions = 0;
        BallParams p = ball_params(cfg.n, cfg.d, cfg.strict_params && !cfg.eta && !cfg.gamma);
        w.eta = cfg.eta.value_or(p.eta);
        w.gamma = cfg.gamma.value_or(p.gamma);
        if (!(w.gamma > 0.0 && w.gamma < 1.0)) throw ConfigError("ball setting needs gamma in (0,1)");
        if (w.eta * cfg.d > 0.5 + 1e-9) {
            if (cfg.strict_params) throw ConfigError("ball parameters violate eta*d <= 1/2");
            w.warnings.push_back("ball parameters violate eta*d <= 1/2; the certificate inequality may not apply");
        }
    } else {  // experts
        w.experts = true;
        w.bound = BoundKind::exp2_john;
        w.expert_base = ActionSet::cross_polytope(cfg.d).points;
        w.num_actions = static_cast<long>(w.expert_base.size());
        if (cfg.num_experts != 0 && cfg.num_experts != w.num_actions)
            throw ConfigError("experts modes use the 2d cross-polytope suggestions; set num_experts to " +
                              std::to_string(w.num_actions) + " or 0");
        double eta = std::sqrt(std::log(static_cast<double>(w.num_actions)) / (3.0 * static_cast<double>(cfg.n) * cfg.d));
        double gamma = eta * cfg.d;
        if (gamma > 0.5) {
            if (cfg.strict_params) throw HorizonTooSmall("experts: gamma = eta d exceeds 1/2 at this horizon");
            gamma = 0.5;
            eta = gamma / cfg.d;
            w.clamped = true;
            w.warnings.push_back("experts defaults clamped to gamma = 1/2 (horizon too small for the tuned formula)");
        }
        w.eta = cfg.eta.value_or(eta);
        w.gamma = cfg.gamma.value_or(gamma);
    }
    return w;
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg, const Wiring& w) {
    if (cfg.setting == "finite") return std::make_unique<Exp2Policy>(*w.exp2_prototype);
    if (cfg.setting == "hypercube") return std::make_unique<HypercubePolicy>(cfg.d, w.eta, w.gamma);
    return std::make_unique<BallPolicy>(cfg.d, w.eta, w.gamma, cfg.ball_projection);
}

Vec prefix_best_values(const ActionSet& set, const std::vector<Vec>& reference_losses) {
    Vec out;
    out.reserve(reference_losses.size());
    Vec prefix = zeros(set.dim);
    for (const Vec& z : reference_losses) {
        add_scaled(prefix, 1.0, z);
        out.push_back(best_action(set, prefix).value);
    }
    return out;
}

SeedOutcome run_policy_seed(const ExperimentConfig& cfg, const Wiring& w, Environment& env, int seed_index) {
    RngStream rng = RngStream::replicate(cfg.master_seed, static_cast<std::uint64_t>(seed_index));
    std::unique_ptr<Policy> policy = make_policy(cfg, w);

    SeedOutcome out;
    out.records = run_trajectory(*policy, env, cfg.n, rng, &out.losses);
    out.certificate = policy->certificate_constant(cfg.n);
    for (const RoundRecord& r : out.records) out.certificate += r.cert_term;

    if (env.adversary().oblivious()) {
        std::vector<Vec> expected;
        expected.reserve(static_cast<size_t>(cfg.n));
        for (long t = 1; t <= cfg.n; ++t) expected.push_back(env.adversary().expected_z(t));
        out.prefix_best = prefix_best_values(env.set(), expected);
    } else {
        out.prefix_best = prefix_best_values(env.set(), out.losses);
    }
    return out;
}

SeedOutcome run_experts_seed(const ExperimentConfig& cfg, const Wiring& w, Environment& env, int seed_index) {
    RngStream rng = RngStream::replicate(cfg.master_seed, static_cast<std::uint64_t>(seed_index));
    const long num = w.num_actions;
    Vec logw(static_cast<size_t>(num), -std::log(static_cast<double>(num)));

    SeedOutcome out;
    Vec prev_played = zeros(cfg.d);
    Vec expert_prefix(static_cast<size_t>(num), 0.0);
    out.certificate = 2.0 * w.gamma * static_cast<double>(cfg.n) + std::log(static_cast<double>(num)) / w.eta;

    for (long t = 1; t <= cfg.n; ++t) {
        std::vector<Vec> suggestions = cfg.experts_mode == "rotating"
                                           ? rotate_plane(w.expert_base, cfg.rotate_omega * static_cast<double>(t))
                                           : w.expert_base;
        Vec z = env.draw_loss(t, prev_played, rng);
        out.losses.push_back(z);
        ExpertsRoundResult res = experts_round(suggestions, logw, w.eta, w.gamma,
                                               [&](const Vec& p) { return dot(p, z); }, rng);
        logw = res.log_weights;
        out.certificate += w.eta * res.second_moment;

        RoundRecord rec;
        rec.t = t;
        rec.played = suggestions[static_cast<size_t>(res.chosen)];
        rec.realized_loss = res.realized_loss;
        rec.internal_action = rec.played;
        rec.exploration = res.exploration;
        out.records.push_back(rec);
        prev_played = rec.played;

        const Vec& ref = env.adversary().oblivious() ? env.adversary().expected_z(t) : z;
        for (long k = 0; k < num; ++k)
            expert_prefix[static_cast<size_t>(k)] += dot(suggestions[static_cast<size_t>(k)], ref);
        out.prefix_best.push_back(*std::min_element(expert_prefix.begin(), expert_prefix.end()));
    }
    return out;
}

std::vector<SeedOutcome> run_all_seeds(const ExperimentConfig& cfg, const Wiring& w, Environment& env) {
    std::vector<SeedOutcome> outcomes(static_cast<size_t>(cfg.seeds));
    const int workers = std::max(1, std::min(cfg.jobs, cfg.seeds));

    auto run_one = [&](int s) {
        outcomes[static_cast<size_t>(s)] =
            w.experts ? run_experts_seed(cfg, w, env, s) : run_policy_seed(cfg, w, env, s);
    };

    if (workers == 1) {
        for (int s = 0; s < cfg.seeds; ++s) run_one(s);
        return outcomes;
    }

    std::atomic<int> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                int s = next.fetch_add(1);
                if (s >= cfg.seeds) return;
                try {
                    run_one(s);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return outcomes;
}

RegretReport build_report(const ExperimentConfig& cfg, const Wiring& w, const Environment& env,
                          const std::vector<SeedOutcome>& outcomes) {
    if (!w.experts) {
        std::vector<std::vector<RoundRecord>> records;
        std::vector<std::vector<Vec>> losses;
        std::vector<double> certs;
        for (const SeedOutcome& o : outcomes) {
            records.push_back(o.records);
            losses.push_back(o.losses);
            certs.push_back(o.certificate);
        }
        return regret_report(records, losses, certs, env, w.bound, cfg.n, w.num_actions);
    }

    RegretReport rep;
    rep.regret_is_realized = !env.adversary().oblivious();
    rep.bound_value = theorem_bound(w.bound, cfg.n, cfg.d, w.num_actions);
    for (const SeedOutcome& o : outcomes) {
        double cum = 0.0;
        for (const RoundRecord& r : o.records) cum += r.realized_loss;
        rep.per_seed_cum_loss.push_back(cum);
        rep.per_seed_pseudo_regret.push_back(cum - o.prefix_best.back());
    }
    rep.best_fixed_value = outcomes.front().prefix_best.back();
    const double k = static_cast<double>(cfg.seeds);
    double mean = 0.0;
    for (double r : rep.per_seed_pseudo_regret) mean += r;
    mean /= k;
    double var = 0.0;
    for (double r : rep.per_seed_pseudo_regret) var += (r - mean) * (r - mean);
    rep.mean_pseudo_regret = mean;
    rep.stderr_pseudo_regret = std::sqrt((k > 1 ? var / (k - 1.0) : 0.0) / k);
    double cert = 0.0;
    for (const SeedOutcome& o : outcomes) cert += o.certificate;
    rep.certificate_value = cert / k;
    return rep;
}

void write_csv(std::ostream& os, const std::vector<SeedOutcome>& outcomes) {
    os << "seed,t,exploration_flag,realized_loss,cum_loss,cum_pseudo_regret\n";
    for (size_t s = 0; s < outcomes.size(); ++s) {
        const SeedOutcome& o = outcomes[s];
        double cum = 0.0;
        for (size_t i = 0; i < o.records.size(); ++i) {
            const RoundRecord& r = o.records[i];
            cum += r.realized_loss;
            os << s << ',' << r.t << ',' << (r.exploration ? 1 : 0) << ','
               << format_double(r.realized_loss) << ',' << format_double(cum) << ','
               << format_double(cum - o.prefix_best[i]) << '\n';
        }
    }
}

nlohmann::json build_report_json(const ExperimentConfig& cfg, const Wiring& w, const RegretReport& rep,
                                 bool pass_bound) {
    nlohmann::json j;
    nlohmann::json jcfg = config_to_json(cfg);
    jcfg["eta_resolved"] = w.eta;
    jcfg["gamma_resolved"] = w.gamma;
    jcfg["eta_source"] = w.eta_source;
    jcfg["gamma_source"] = w.gamma_source;
    jcfg["params_clamped"] = w.clamped;
    j["config"] = jcfg;
    j["bound"] = rep.bound_value;
    j["mean_pseudo_regret"] = rep.mean_pseudo_regret;
    j["stderr_pseudo_regret"] = rep.stderr_pseudo_regret;
    j["certificate"] = rep.certificate_value;
    j["best_fixed_value"] = rep.best_fixed_value;
    j["per_seed_pseudo_regret"] = rep.per_seed_pseudo_regret;
    j["per_seed_cum_loss"] = rep.per_seed_cum_loss;
    j["regret_is_realized"] = rep.regret_is_realized;
    j["pass_bound"] = pass_bound;
    j["warnings"] = w.warnings;
    return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
    validate_config(cfg);
    ActionSet set = build_action_set(cfg);
    Environment env(set, build_adversary(cfg, set.kind));
    Wiring w = resolve(cfg, env);

    std::vector<SeedOutcome> outcomes = run_all_seeds(cfg, w, env);

    ExperimentResult result;
    result.warnings = w.warnings;
    result.report = build_report(cfg, w, env, outcomes);
    result.pass_bound = result.report.mean_pseudo_regret <= result.report.bound_value;
    result.report_json = build_report_json(cfg, w, result.report, result.pass_bound);

    if (write_files) {
        fs::path dir(cfg.out_dir);
        fs::create_directories(dir);
        fs::path csv_tmp = dir / "rounds.csv.tmp";
        fs::path csv_final = dir / "rounds.csv";
        fs::path rep_tmp = dir / "report.json.tmp";
        fs::path rep_final = dir / "report.json";
        try {
            {
                std::ofstream f(csv_tmp);
                if (!f) throw ConfigError("cannot write " + csv_tmp.string());
                write_csv(f, outcomes);
            }
            {
                std::ofstream f(rep_tmp);
                if (!f) throw ConfigError("cannot write " + rep_tmp.string());
                f << result.report_json.dump(2) << '\n';
            }
            fs::rename(csv_tmp, csv_final);
            fs::rename(rep_tmp, rep_final);
        } catch (...) {
            std::error_code ec;
            fs::remove(csv_tmp, ec);
            fs::remove(rep_tmp, ec);
            throw;
        }
        result.csv_path = csv_final.string();
        result.report_path = rep_final.string();
    }
    return result;
}

std::string render_rounds_csv(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ActionSet set = build_action_set(cfg);
    Environment env(set, build_adversary(cfg, set.kind));
    Wiring w = resolve(cfg, env);
    std::vector<SeedOutcome> outcomes = run_all_seeds(cfg, w, env);
    std::ostringstream os;
    write_csv(os, outcomes);
    return os.str();
}

}  // namespace banlin
