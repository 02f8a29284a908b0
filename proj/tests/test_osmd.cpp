#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "banlin/ball.hpp"
#include "banlin/env.hpp"
#include "banlin/errors.hpp"
#include "banlin/hypercube.hpp"
#include "banlin/osmd.hpp"
#include "oracles.hpp"

using namespace banlin;

TEST_CASE("osmd_init starts at the regularizer minimum") {
    auto hreg = std::make_shared<HypercubeRegularizer>(3);
    OsmdState hs = osmd_init(hreg, 0.1);
    CHECK(norm_inf(hs.current_action) == 0.0);
    CHECK(norm_inf(hs.cum_estimate) == 0.0);
    CHECK(hs.round == 1);

    auto breg = std::make_shared<BallRegularizer>(3, 0.9);
    OsmdState bs = osmd_init(breg, 0.1);
    CHECK(norm_inf(bs.current_action) == 0.0);

    // dual gradient at zero recovers the minimizer for both instances
    CHECK(norm_inf(hreg->dual_grad(zeros(3)) - hreg->min_point()) < 1e-9);
    CHECK(norm_inf(breg->dual_grad(zeros(3)) - breg->min_point()) < 1e-9);
    CHECK_THROWS_AS(osmd_init(hreg, 0.0), std::invalid_argument);
}

TEST_CASE("osmd_step with a zero estimate leaves the action in place") {
    auto reg = std::make_shared<BallRegularizer>(2, 0.9);
    OsmdState s = osmd_init(reg, 0.5);
    osmd_step(s, zeros(2));
    CHECK(norm_inf(s.current_action) == 0.0);
    CHECK(s.round == 2);
}

TEST_CASE("osmd_step on the ball matches the dual-map arithmetic") {
    auto reg = std::make_shared<BallRegularizer>(2, 0.9);
    OsmdState s = osmd_init(reg, 1.0);
    osmd_step(s, {-3.0, -4.0});  // -eta * cum = (3, 4)
    CHECK(s.current_action[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.current_action[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("osmd_step on the hypercube follows tanh(-eta t) under a constant estimate") {
    const double eta = 0.05;
    auto reg = std::make_shared<HypercubeRegularizer>(2);
    OsmdState s = osmd_init(reg, eta);
    double prev = 0.0;
    for (int t = 1; t <= 60; ++t) {
        osmd_step(s, basis_vector(2, 0, 1.0));
        CHECK(s.current_action[0] == doctest::Approx(std::tanh(-eta * t)).epsilon(1e-12));
        CHECK(s.current_action[1] == 0.0);
        CHECK(s.current_action[0] < prev);
        prev = s.current_action[0];
    }
    CHECK(s.current_action[0] > -1.0);
}

TEST_CASE("osmd_step rejects a dual map that escapes the domain") {
    struct Broken final : Regularizer {
        int dim() const override { return 1; }
        double value(const Vec&) const override { return 0.0; }
        Vec grad(const Vec&) const override { return zeros(1); }
        double dual_value(const Vec&) const override { return 0.0; }
        Vec dual_grad(const Vec&) const override { return {2.0}; }
        Vec min_point() const override { return zeros(1); }
        double range_sup() const override { return 1.0; }
        bool in_domain_closure(const Vec& x, double tol) const override { return norm_inf(x) <= 1.0 + tol; }
    };
    OsmdState s = osmd_init(std::make_shared<Broken>(), 1.0);
    CHECK_THROWS_AS(osmd_step(s, {1.0}), DomainEscape);
}

TEST_CASE("bregman_dual basics and closed forms") {
    HypercubeRegularizer hreg(3);
    RngStream rng(5);
    Vec u = oracles::random_vec(3, rng);
    CHECK(bregman_dual(hreg, u, u) == doctest::Approx(0.0).epsilon(1e-14));

    // against v = 0 the divergence collapses to sum log cosh u_i
    double expect = 0.0;
    for (double ui : u) expect += std::log(std::cosh(ui));
    CHECK(bregman_dual(hreg, u, zeros(3)) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bregman_dual agrees with its finite-difference reconstruction") {
    RngStream rng(7);
    HypercubeRegularizer hreg(4);
    BallRegularizer breg(4, 0.9);
    for (int rep = 0; rep < 50; ++rep) {
        Vec u = oracles::random_vec(4, rng, 2.0);
        Vec v = oracles::random_vec(4, rng, 2.0);
        for (const Regularizer* reg : {static_cast<const Regularizer*>(&hreg), static_cast<const Regularizer*>(&breg)}) {
            Vec grad_fd = oracles::finite_diff([&](const Vec& x) { return reg->dual_value(x); }, v);
            CHECK(norm_inf(grad_fd - reg->dual_grad(v)) < 1e-6 * std::max(1.0, norm_inf(reg->dual_grad(v))));
            double direct = reg->dual_value(u) - reg->dual_value(v) - dot(u - v, reg->dual_grad(v));
            CHECK(bregman_dual(*reg, u, v) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("bregman divergence is nonnegative and zero only at u = v") {
    RngStream rng(11);
    HypercubeRegularizer hreg(3);
    BallRegularizer breg(3, 0.9);
    for (int rep = 0; rep < 200; ++rep) {
        Vec u = oracles::random_vec(3, rng, 2.0);
        Vec v = oracles::random_vec(3, rng, 2.0);
        for (const Regularizer* reg : {static_cast<const Regularizer*>(&hreg), static_cast<const Regularizer*>(&breg)}) {
            double d = bregman_dual(*reg, u, v);
            CHECK(d >= -1e-12);
            if (norm_inf(u - v) > 1e-3) CHECK(d > 0.0);
        }
    }
}

TEST_CASE("gradient maps invert each other on random domain points") {
    RngStream rng(13);
    HypercubeRegularizer hreg(5);
    BallRegularizer breg(5, 0.9);
    for (int rep = 0; rep < 1000; ++rep) {
        Vec x(5);
        for (double& v : x) v = 1.9 * rng.uniform01() - 0.95;
        CHECK(norm_inf(hreg.dual_grad(hreg.grad(x)) - x) < 1e-8);

        Vec xb = (0.97 * rng.uniform01()) * oracles::random_unit(5, rng);
        CHECK(norm_inf(breg.dual_grad(breg.grad(xb)) - xb) < 1e-8);
    }
}

TEST_CASE("dual gradients match central differences of the dual value") {
    RngStream rng(17);
    HypercubeRegularizer hreg(4);
    BallRegularizer breg(4, 0.9);
    for (int rep = 0; rep < 1000; ++rep) {
        Vec u = oracles::random_vec(4, rng, 3.0);
        for (const Regularizer* reg : {static_cast<const Regularizer*>(&hreg), static_cast<const Regularizer*>(&breg)}) {
            Vec g = reg->dual_grad(u);
            Vec fd = oracles::finite_diff([&](const Vec& x) { return reg->dual_value(x); }, u);
            for (size_t i = 0; i < g.size(); ++i)
                CHECK(std::abs(fd[i] - g[i]) < 1e-5 * std::max(1.0, std::abs(g[i])));
        }
    }
}

TEST_CASE("regret_certificate composes its three terms") {
    CertificateTrace trace;
    trace.bregman_terms = {0.0, 0.0, 0.0};
    trace.bias_terms = {0.0, 0.0, 0.0};
    const double f_range = 3.0 * std::log(2.0);
    // a zero-loss run charges only the range term
    CHECK(regret_certificate(trace, f_range, 0.1) == doctest::Approx(f_range / 0.1).epsilon(1e-12));

    // single-round hand evaluation
    CertificateTrace one;
    one.bregman_terms = {0.25};
    one.bias_terms = {0.01};
    one.comparator_slack = 2.0;
    CHECK(regret_certificate(one, 1.5, 0.5) == doctest::Approx(2.0 + 1.5 / 0.5 + 0.25 / 0.5 + 0.01).epsilon(1e-12));
}

TEST_CASE("certificate dominates realized pseudo-regret on oblivious runs (mean over seeds)") {
    const int d = 3;
    const long n = 500;
    Environment env(ActionSet::ball(d), make_fixed_adversary(basis_vector(d, 0, 1.0)));
    double mean_regret = 0.0, mean_cert = 0.0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        RngStream rng = RngStream::replicate(2024, static_cast<std::uint64_t>(s));
        BallPolicy policy(d, n);
        auto records = run_trajectory(policy, env, n, rng);
        double cum = 0.0, cert = policy.certificate_constant(n);
        for (const auto& r : records) {
            cum += r.realized_loss;
            cert += r.cert_term;
        }
        mean_regret += cum - (-static_cast<double>(n));  // best action -e1 collects -n
        mean_cert += cert;
    }
    mean_regret /= seeds;
    mean_cert /= seeds;
    CHECK(mean_regret <= mean_cert);
}
