// banlin: adversarial linear bandit experiments.
//
//   banlin run    --config c.json [overrides]   simulate and check bounds
//   banlin verify [--seed S] [--quick]          run the invariant suites
//   banlin john   --points file.csv [--tol T]   ellipsoid + exploration weights
//
// Exit codes: 0 all checks passed, 1 bound/validation failure, 2 usage error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "banlin/ball.hpp"
#include "banlin/config.hpp"
#include "banlin/csv.hpp"
#include "banlin/errors.hpp"
#include "banlin/exp2.hpp"
#include "banlin/experiment.hpp"
#include "banlin/hypercube.hpp"

namespace {

using namespace banlin;

struct RunFlags {
    std::string config_path;
    std::optional<std::string> setting, adversary, finite_shape, points_file, sequence_file, experts_mode, out_dir;
    std::optional<int> d, seeds, jobs;
    std::optional<long> n, num_experts;
    std::optional<double> eta, gamma, rotate_omega;
    std::optional<std::uint64_t> master_seed;
    bool strict = false;
    bool ball_projection = false;
    bool emit_config = false;
};

ExperimentConfig merge_flags(const RunFlags& f) {
    ExperimentConfig cfg;
    if (!f.config_path.empty()) cfg = load_config_file(f.config_path);
    if (f.setting) cfg.setting = *f.setting;
    if (f.d) cfg.d = *f.d;
    if (f.n) cfg.n = *f.n;
    if (f.num_experts) cfg.num_experts = *f.num_experts;
    if (f.seeds) cfg.seeds = *f.seeds;
    if (f.master_seed) cfg.master_seed = *f.master_seed;
    if (f.adversary) cfg.adversary = *f.adversary;
    if (f.sequence_file) cfg.sequence_file = *f.sequence_file;
    if (f.rotate_omega) cfg.rotate_omega = *f.rotate_omega;
    if (f.finite_shape) cfg.finite_shape = *f.finite_shape;
    if (f.points_file) cfg.points_file = *f.points_file;
    if (f.experts_mode) cfg.experts_mode = *f.experts_mode;
    if (f.eta) cfg.eta = *f.eta;
    if (f.gamma) cfg.gamma = *f.gamma;
    if (f.strict) cfg.strict_params = true;
    if (f.ball_projection) cfg.ball_projection = true;
    if (f.jobs) cfg.jobs = *f.jobs;
    if (f.out_dir) cfg.out_dir = *f.out_dir;
    validate_config(cfg);
    return cfg;
}

int cmd_run(const RunFlags& flags) {
    ExperimentConfig cfg = merge_flags(flags);
    if (flags.emit_config) {
        std::cout << config_to_json(cfg).dump(2) << '\n';
        return 0;
    }
    ExperimentResult res = run_experiment(cfg);
    for (const std::string& wmsg : res.warnings) std::cerr << "warning: " << wmsg << '\n';
    std::cout << "setting            : " << cfg.setting << " (d=" << cfg.d << ", n=" << cfg.n
              << ", seeds=" << cfg.seeds << ", adversary=" << cfg.adversary << ")\n";
    std::cout << "mean pseudo-regret : " << format_double(res.report.mean_pseudo_regret)
              << "  (stderr " << format_double(res.report.stderr_pseudo_regret) << ")\n";
    std::cout << "theorem bound      : " << format_double(res.report.bound_value) << '\n';
    std::cout << "certificate        : " << format_double(res.report.certificate_value) << '\n';
    if (res.report.regret_is_realized)
        std::cout << "note               : adaptive adversary, regret measured against realized losses\n";
    std::cout << "outputs            : " << res.csv_path << ", " << res.report_path << '\n';
    std::cout << (res.pass_bound ? "PASS" : "FAIL") << " - mean pseudo-regret within the theorem bound\n";
    return res.pass_bound ? 0 : 1;
}

// ---------------------------------------------------------------------------
// banlin verify: in-process property suites over freshly drawn instances.

struct Check {
    int run = 0;
    int failed = 0;
    void expect(bool ok) {
        ++run;
        if (!ok) ++failed;
    }
};

bool report(const char* name, const Check& c) {
    std::printf("%-52s %s (%d checks)\n", name, c.failed == 0 ? "PASS" : "FAIL", c.run);
    return c.failed == 0;
}

Vec random_unit(int d, RngStream& rng) {
    Vec v(static_cast<size_t>(d));
    double n;
    do {
        for (double& x : v) x = rng.gaussian();
        n = norm2(v);
    } while (n < 1e-9);
    return (1.0 / n) * v;
}

bool verify_john_identity(std::uint64_t seed, int sets) {
    Check c;
    RngStream rng(seed);
    for (int k = 0; k < sets; ++k) {
        int d = 2 + rng.uniform_int(5);
        int n = d + 2 + rng.uniform_int(30);
        std::vector<Vec> pts;
        for (int i = 0; i < n; ++i) {
            Vec p(static_cast<size_t>(d));
            for (double& x : p) x = rng.gaussian();
            pts.push_back(std::move(p));
        }
        auto pre = preprocess(pts);
        JohnExploration john = john_weights(pre);
        c.expect(verify_john(john) <= 1e-6);
        c.expect(static_cast<long>(john.weights.size()) <= static_cast<long>(d) * (d + 1) / 2 + 1);
        double wsum = 0.0;
        for (double wv : john.weights) wsum += wv;
        c.expect(std::abs(wsum - 1.0) <= 1e-9);
    }
    return report("john identity / support bound", c);
}

bool verify_unbiasedness(std::uint64_t seed, int configs) {
    Check c;
    RngStream rng(seed);
    for (int k = 0; k < configs; ++k) {
        // hypercube estimator, exact enumeration over all outcomes
        int d = 2 + rng.uniform_int(4);
        Vec a(static_cast<size_t>(d));
        for (double& x : a) x = 1.6 * rng.uniform01() - 0.8;
        double gamma = 0.05 + 0.4 * rng.uniform01();
        Vec z(static_cast<size_t>(d));
        for (double& x : z) x = 2.0 * rng.uniform01() - 1.0;
        double zn = norm1(z);
        if (zn > 0) z = (1.0 / zn) * z;

        Vec mean = zeros(d);
        long corners = 1L << d;
        for (long mask = 0; mask < corners; ++mask) {
            HypercubePerturbOutcome o;
            o.played.resize(static_cast<size_t>(d));
            double prob = 1.0 - gamma;
            for (int i = 0; i < d; ++i) {
                bool plus = (mask >> i) & 1;
                o.played[static_cast<size_t>(i)] = plus ? 1.0 : -1.0;
                prob *= plus ? 0.5 * (1.0 + a[static_cast<size_t>(i)]) : 0.5 * (1.0 - a[static_cast<size_t>(i)]);
            }
            add_scaled(mean, prob, hyper_estimate(a, o, dot(o.played, z), gamma));
        }
        for (int i = 0; i < d; ++i)
            for (int s2 = -1; s2 <= 1; s2 += 2) {
                HypercubePerturbOutcome o;
                o.was_exploration = true;
                o.basis_index = i;
                o.sign = s2;
                o.played = basis_vector(d, i, s2);
                add_scaled(mean, gamma / (2.0 * d), hyper_estimate(a, o, dot(o.played, z), gamma));
            }
        c.expect(norm_inf(mean - z) <= 1e-9);

        // ball estimator
        Vec ab = (0.9 * rng.uniform01()) * random_unit(d, rng);
        Vec zb = (rng.uniform01()) * random_unit(d, rng);
        Vec meanb = zeros(d);
        double na = norm2(ab);
        {
            BallPerturbOutcome o;
            o.xi = true;
            o.played = na > 0 ? (1.0 / na) * ab : basis_vector(d, 0, 1.0);
            add_scaled(meanb, na, ball_estimate(ab, o, dot(o.played, zb)));
        }
        for (int i = 0; i < d; ++i)
            for (int s2 = -1; s2 <= 1; s2 += 2) {
                BallPerturbOutcome o;
                o.basis_index = i;
                o.sign = s2;
                o.played = basis_vector(d, i, s2);
                add_scaled(meanb, (1.0 - na) / (2.0 * d), ball_estimate(ab, o, dot(o.played, zb)));
            }
        c.expect(norm_inf(meanb - zb) <= 1e-9);
    }
    return report("estimator unbiasedness (enumeration)", c);
}

bool verify_exp2_unbiasedness(std::uint64_t seed, int configs) {
    Check c;
    RngStream rng(seed);
    for (int k = 0; k < configs; ++k) {
        int d = 2 + rng.uniform_int(3);
        int n = d + 2 + rng.uniform_int(8);
        std::vector<Vec> pts;
        for (int i = 0; i < n; ++i) {
            Vec p(static_cast<size_t>(d));
            for (double& x : p) x = rng.gaussian();
            pts.push_back(std::move(p));
        }
        auto pre = std::make_shared<const PreprocessedActions>(preprocess(pts));
        Exp2State st = exp2_init(pre, 10000);
        for (double& lw : st.log_weights) lw += rng.gaussian();
        {  // renormalize perturbed weights
            double m = *std::max_element(st.log_weights.begin(), st.log_weights.end());
            double sum = 0.0;
            for (double lw : st.log_weights) sum += std::exp(lw - m);
            for (double& lw : st.log_weights) lw -= m + std::log(sum);
        }
        Vec z(static_cast<size_t>(pre->rank));
        for (double& x : z) x = rng.gaussian();
        double worst = 0.0;
        for (size_t i = 0; i < pre->actions.size(); ++i)
            worst = std::max(worst, std::abs(pre->metric.inner(pre->actions[i], z)));
        if (worst > 0) z = (1.0 / worst) * z;

        Vec p = exp2_probabilities(st);
        Vec mean = zeros(pre->rank);
        for (size_t i = 0; i < p.size(); ++i)
            add_scaled(mean, p[i], exp2_estimate(st, static_cast<int>(i), pre->metric.inner(pre->actions[i], z)));
        c.expect(norm_inf(mean - z) <= 1e-9 * std::max(1.0, norm_inf(z)));
    }
    return report("exp2 estimator unbiasedness (enumeration)", c);
}

bool verify_bregman(std::uint64_t seed, int pairs) {
    Check c;
    RngStream rng(seed);
    for (int k = 0; k < pairs; ++k) {
        int d = 1 + rng.uniform_int(6);
        Vec v(static_cast<size_t>(d)), delta(static_cast<size_t>(d));
        for (double& x : v) x = 6.0 * rng.uniform01() - 3.0;
        for (double& x : delta) x = rng.uniform01() - 0.5;
        Vec u = v + delta;
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < d; ++i) {
            double th = std::tanh(v[static_cast<size_t>(i)]);
            rhs += (1.0 - th * th) * delta[static_cast<size_t>(i)] * delta[static_cast<size_t>(i)];
        }
        HypercubeRegularizer reg(d);
        lhs = bregman_dual(reg, u, v);
        c.expect(lhs <= rhs + 1e-9);
        c.expect(lhs >= -1e-12);

        // ball: Theta(u,v) <= ||u-v||^2 whenever the relative norm drop is >= -1/2
        Vec vb(static_cast<size_t>(d)), ub(static_cast<size_t>(d));
        for (double& x : vb) x = 3.0 * rng.gaussian();
        for (double& x : ub) x = 3.0 * rng.gaussian();
        double nu = norm2(ub), nv = norm2(vb);
        if ((nu - nv) / (1.0 + nv) >= -0.5) {
            BallRegularizer regb(d, 0.5);
            double theta = (1.0 + nv) * bregman_dual(regb, ub, vb);
            double dist = norm2(ub - vb);
            c.expect(theta <= dist * dist + 1e-9);
        }
    }
    return report("bregman divergence inequalities", c);
}

bool verify_gradient_maps(std::uint64_t seed, int points) {
    Check c;
    RngStream rng(seed);
    for (int k = 0; k < points; ++k) {
        int d = 1 + rng.uniform_int(6);
        HypercubeRegularizer hreg(d);
        BallRegularizer breg(d, 0.5);
        Vec x(static_cast<size_t>(d));
        for (double& v : x) v = 1.9 * rng.uniform01() - 0.95;
        c.expect(norm_inf(hreg.dual_grad(hreg.grad(x)) - x) <= 1e-8);
        Vec xb = (0.95 * rng.uniform01()) * random_unit(d, rng);
        c.expect(norm_inf(breg.dual_grad(breg.grad(xb)) - xb) <= 1e-8);

        // central differences of F* against dual_grad
        Vec u(static_cast<size_t>(d));
        for (double& v : u) v = 4.0 * rng.gaussian();
        const double h = 1e-5;
        for (const Regularizer* reg : {static_cast<const Regularizer*>(&hreg), static_cast<const Regularizer*>(&breg)}) {
            Vec g = reg->dual_grad(u);
            for (int i = 0; i < d; ++i) {
                Vec up = u, um = u;
                up[static_cast<size_t>(i)] += h;
                um[static_cast<size_t>(i)] -= h;
                double fd = (reg->dual_value(up) - reg->dual_value(um)) / (2.0 * h);
                double scale = std::max(1.0, std::abs(g[static_cast<size_t>(i)]));
                c.expect(std::abs(fd - g[static_cast<size_t>(i)]) <= 1e-5 * scale);
            }
        }
    }
    return report("legendre gradient maps / finite differences", c);
}

bool verify_numlin(std::uint64_t seed, int cases) {
    Check c;
    RngStream rng(seed);
    for (int k = 0; k < cases; ++k) {
        int d = 2 + rng.uniform_int(6);
        Matrix g(d, d);
        for (int r = 0; r < d; ++r)
            for (int cc = 0; cc < d; ++cc) g(r, cc) = rng.gaussian();
        Matrix m = g * g.transposed();
        SymMatrix sym(m, 1e-6);
        SpectralDecomp dec = sym_eig(sym);
        c.expect(frobenius_distance(dec.reconstruct(), sym.mat()) <= 1e-8 * std::max(1.0, sym.mat().frobenius()));
        SymMatrix pinv = psd_pinv(sym);
        Matrix mpm = sym.mat() * pinv.mat() * sym.mat();
        c.expect(frobenius_distance(mpm, sym.mat()) <= 1e-8 * std::max(1.0, sym.mat().frobenius()));
    }
    return report("spectral decomposition / pseudo-inverse", c);
}

int cmd_verify(std::uint64_t seed, bool quick) {
    const int sets = quick ? 8 : 25;
    const int cfgs = quick ? 10 : 40;
    const int pairs = quick ? 400 : 2000;
    const int pts = quick ? 60 : 250;
    bool ok = true;
    ok &= verify_numlin(seed ^ 0x11, quick ? 10 : 40);
    ok &= verify_john_identity(seed ^ 0x22, sets);
    ok &= verify_unbiasedness(seed ^ 0x33, cfgs);
    ok &= verify_exp2_unbiasedness(seed ^ 0x44, quick ? 8 : 25);
    ok &= verify_bregman(seed ^ 0x55, pairs);
    ok &= verify_gradient_maps(seed ^ 0x66, pts);
    std::printf("%s\n", ok ? "all verification suites passed" : "verification FAILED");
    return ok ? 0 : 1;
}

int cmd_john(const std::string& points_path, double tol) {
    std::vector<Vec> pts = load_csv_rows(points_path);
    if (pts.empty()) throw EmptySet("points file is empty");
    PreprocessedActions pre = preprocess(pts, std::min(tol, 1e-9));
    Ellipsoid ell = mvee(reduce_rank(pts).points, tol);
    JohnExploration john = john_weights(pre);

    std::cout << "points             : " << pts.size() << " in dimension " << pts.front().size()
              << " (affine rank " << pre.rank << ")\n";
    std::cout << "mvee center        :";
    for (double v : ell.center) std::cout << ' ' << format_double(v);
    std::cout << "\nmvee shape H       :\n";
    for (int r = 0; r < ell.shape.rows(); ++r) {
        std::cout << "  ";
        for (int c = 0; c < ell.shape.cols(); ++c) std::cout << format_double(ell.shape(r, c)) << (c + 1 < ell.shape.cols() ? " " : "");
        std::cout << '\n';
    }
    std::cout << "dual gap           : " << format_double(ell.dual_gap) << " (" << ell.iterations << " iterations)\n";
    std::cout << "contact points     : " << john.contact_points.size() << '\n';
    for (size_t i = 0; i < john.contact_points.size(); ++i) {
        std::cout << "  mu=" << format_double(john.weights[i]) << "  action#" << john.action_indices[i] << " :";
        for (double v : pts[static_cast<size_t>(john.action_indices[i])]) std::cout << ' ' << format_double(v);
        std::cout << '\n';
    }
    std::cout << "identity residual  : " << format_double(verify_john(john)) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial linear bandits: exponential weights with John exploration and mirror descent"};
    app.require_subcommand(1);

    RunFlags flags;
    CLI::App* run = app.add_subcommand("run", "run an experiment and check the regret bound");
    run->add_option("--config", flags.config_path, "JSON config file");
    run->add_option("--setting", flags.setting, "finite | hypercube | ball | experts");
    run->add_option("--d", flags.d, "dimension");
    run->add_option("--n", flags.n, "horizon");
    run->add_option("--N", flags.num_experts, "number of experts (experts setting)");
    run->add_option("--seeds", flags.seeds, "number of replicates");
    run->add_option("--master-seed", flags.master_seed, "master seed");
    run->add_option("--adversary", flags.adversary, "fixed | iid_l1_vertex | iid_sphere | rotating | sequence_file | adaptive_worst");
    run->add_option("--sequence-file", flags.sequence_file, "CSV of loss vectors (row t = z_t)");
    run->add_option("--rotate-omega", flags.rotate_omega, "angular speed of the rotating adversary");
    run->add_option("--finite-shape", flags.finite_shape, "cross_polytope | hypercube_corners | file");
    run->add_option("--points", flags.points_file, "CSV of actions (one per row)");
    run->add_option("--experts-mode", flags.experts_mode, "fixed | rotating");
    run->add_option("--eta", flags.eta, "learning-rate override");
    run->add_option("--gamma", flags.gamma, "exploration-rate override");
    run->add_flag("--strict", flags.strict, "refuse parameter clamping and precondition violations");
    run->add_flag("--ball-projection", flags.ball_projection, "clip the ball iterate to the shrunk comparator ball");
    run->add_option("--jobs", flags.jobs, "replicate worker threads");
    run->add_option("--out-dir", flags.out_dir, "output directory");
    run->add_flag("--emit-config", flags.emit_config, "print the resolved config instead of running");

    std::uint64_t verify_seed = 1;
    bool verify_quick = false;
    CLI::App* ver = app.add_subcommand("verify", "run the invariant and property suites");
    ver->add_option("--seed", verify_seed, "seed for the generated instances");
    ver->add_flag("--quick", verify_quick, "smaller instance counts");

    std::string john_points;
    double john_tol = 1e-8;
    CLI::App* john = app.add_subcommand("john", "minimum-volume ellipsoid and exploration weights of a point set");
    john->add_option("--points", john_points, "CSV of points (one per row)")->required();
    john->add_option("--tol", john_tol, "mvee dual-gap tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(flags);
        if (ver->parsed()) return cmd_verify(verify_seed, verify_quick);
        if (john->parsed()) return cmd_john(john_points, john_tol);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
