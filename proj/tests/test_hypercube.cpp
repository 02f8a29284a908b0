#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "banlin/errors.hpp"
#include "banlin/hypercube.hpp"
#include "oracles.hpp"

using namespace banlin;

namespace {

// Independent tanh through long-double exponentials.
double tanh_oracle(double v) {
    long double e = std::exp(2.0L * static_cast<long double>(v));
    return static_cast<double>((e - 1.0L) / (e + 1.0L));
}

Vec random_interior(int d, RngStream& rng, double radius = 0.8) {
    Vec a(static_cast<size_t>(d));
    for (double& x : a) x = radius * (2.0 * rng.uniform01() - 1.0);
    return a;
}

Vec random_l1_unit(int d, RngStream& rng) {
    Vec z(static_cast<size_t>(d));
    for (double& x : z) x = 2.0 * rng.uniform01() - 1.0;
    double n = norm1(z);
    return n > 0 ? (1.0 / n) * z : basis_vector(d, 0, 1.0);
}

}  // namespace

TEST_CASE("entropic_f values") {
    CHECK(entropic_f(zeros(4)) == 0.0);
    // the corner value caps the regularizer range at d log 2
    for (int d = 1; d <= 6; ++d) {
        Vec corner(static_cast<size_t>(d), 1.0);
        CHECK(entropic_f(corner) == doctest::Approx(d * std::log(2.0)).epsilon(1e-12));
        CHECK(HypercubeRegularizer(d).range_sup() == doctest::Approx(d * std::log(2.0)).epsilon(1e-12));
    }
    CHECK(entropic_f({0.5, 0.0}) ==
          doctest::Approx(0.5 * (1.5 * std::log(1.5) + 0.5 * std::log(0.5))).epsilon(1e-12));
    CHECK(std::isinf(entropic_f({1.2, 0.0})));
}

TEST_CASE("entropic dual gradient") {
    CHECK(norm_inf(entropic_dual_grad(zeros(3))) == 0.0);

    Vec x = {0.5, -0.5};
    CHECK(norm_inf(entropic_dual_grad(entropic_grad(x)) - x) < 1e-12);

    Vec v = {1.0, -2.0};
    Vec g = entropic_dual_grad(v);
    CHECK(g[0] == doctest::Approx(tanh_oracle(1.0)).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(tanh_oracle(-2.0)).epsilon(1e-12));
}

TEST_CASE("hyper_perturb marginal means track (1-gamma) a") {
    RngStream rng(3);
    const int d = 4;
    Vec a = {0.9, -0.4, 0.2, 0.0};
    const long trials = 100000;
    SUBCASE("no exploration") {
        Vec sum = zeros(d);
        for (long i = 0; i < trials; ++i) {
            auto o = hyper_perturb(a, 0.0, rng);
            CHECK(!o.was_exploration);
            for (int k = 0; k < d; ++k) CHECK(std::abs(o.played[static_cast<size_t>(k)]) == 1.0);
            add_scaled(sum, 1.0 / trials, o.played);
        }
        for (int k = 0; k < d; ++k) {
            double sigma = std::sqrt((1.0 - a[static_cast<size_t>(k)] * a[static_cast<size_t>(k)]) / trials);
            CHECK(std::abs(sum[static_cast<size_t>(k)] - a[static_cast<size_t>(k)]) < 3.0 * sigma + 1e-12);
        }
    }
    SUBCASE("pure exploration has covariance I/d") {
        Matrix cov(d, d);
        for (long i = 0; i < trials; ++i) {
            auto o = hyper_perturb(a, 1.0, rng);
            CHECK(o.was_exploration);
            CHECK(norm1(o.played) == 1.0);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c)
                    cov(r, c) += o.played[static_cast<size_t>(r)] * o.played[static_cast<size_t>(c)] / trials;
        }
        double sigma = 3.0 / std::sqrt(static_cast<double>(trials));
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                CHECK(std::abs(cov(r, c) - (r == c ? 1.0 / d : 0.0)) < sigma);
    }
    SUBCASE("center of the cube gives zero-mean corners") {
        Vec sum = zeros(d);
        for (long i = 0; i < trials; ++i) add_scaled(sum, 1.0 / trials, hyper_perturb(zeros(d), 0.0, rng).played);
        for (int k = 0; k < d; ++k) CHECK(std::abs(sum[static_cast<size_t>(k)]) < 3.0 / std::sqrt(static_cast<double>(trials)));
    }
}

TEST_CASE("hyper_pt closed form: special cases") {
    CHECK(frobenius_distance(hyper_pt(zeros(3), 0.0), Matrix::identity(3)) < 1e-15);

    Matrix ones(2, 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) ones(r, c) = 1.0;
    CHECK(frobenius_distance(hyper_pt({1.0, 1.0}, 0.0), ones) < 1e-15);
}

TEST_CASE("hyper_pt equals the enumeration-exact covariance") {
    RngStream rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        int d = 2 + rng.uniform_int(9);  // up to 10
        Vec a = random_interior(d, rng);
        double gamma = rng.uniform01() * 0.9;
        Matrix exact(d, d);
        for (const auto& ho : oracles::enumerate_hyper(a, gamma))
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c)
                    exact(r, c) += ho.prob * ho.outcome.played[static_cast<size_t>(r)] * ho.outcome.played[static_cast<size_t>(c)];
        CHECK(frobenius_distance(hyper_pt(a, gamma), exact) < 1e-12);
        CHECK(min_eig(SymMatrix(hyper_pt(a, gamma), 1e-6)) >= gamma / d - 1e-12);
    }
}

TEST_CASE("hyper_pt matches a Monte Carlo covariance") {
    RngStream rng(7);
    Vec a = {0.3, -0.6};
    const double gamma = 0.2;
    const long trials = 1000000;
    Matrix mc(2, 2);
    for (long i = 0; i < trials; ++i) {
        Vec p = hyper_perturb(a, gamma, rng).played;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) mc(r, c) += p[static_cast<size_t>(r)] * p[static_cast<size_t>(c)] / trials;
    }
    Matrix closed = hyper_pt(a, gamma);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(std::abs(mc(r, c) - closed(r, c)) < 2e-3);
}

TEST_CASE("hyper_estimate special cases") {
    RngStream rng(9);
    Vec a = {0.2, -0.5, 0.1};
    auto o = hyper_perturb(a, 0.3, rng);
    CHECK(norm_inf(hyper_estimate(a, o, 0.0, 0.3)) == 0.0);

    // gamma = 0 at the center: P = I, so the estimate is loss * played
    Vec zero = zeros(3);
    auto corner = hyper_perturb(zero, 0.0, rng);
    Vec est = hyper_estimate(zero, corner, 0.7, 0.0);
    CHECK(norm_inf(est - 0.7 * corner.played) < 1e-12);
}

TEST_CASE("hyper_estimate agrees with a dense pseudo-inverse solve") {
    RngStream rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        int d = 2 + rng.uniform_int(5);
        Vec a = random_interior(d, rng);
        double gamma = 0.05 + 0.6 * rng.uniform01();
        auto o = hyper_perturb(a, gamma, rng);
        double loss = 2.0 * rng.uniform01() - 1.0;
        Vec fast = hyper_estimate(a, o, loss, gamma);
        Vec dense = psd_pinv(SymMatrix(hyper_pt(a, gamma), 1e-6)).mat().apply(loss * o.played);
        CHECK(norm_inf(fast - dense) < 1e-9 * std::max(1.0, norm_inf(dense)));
    }
}

TEST_CASE("hyper_estimate is exactly unbiased under enumeration") {
    RngStream rng(13);
    for (int rep = 0; rep < 100; ++rep) {
        int d = 2 + rng.uniform_int(5);  // up to 6
        Vec a = random_interior(d, rng);
        double gamma = 0.05 + 0.6 * rng.uniform01();
        Vec z = random_l1_unit(d, rng);
        Vec mean = zeros(d);
        for (const auto& ho : oracles::enumerate_hyper(a, gamma))
            add_scaled(mean, ho.prob, hyper_estimate(a, ho.outcome, dot(ho.outcome.played, z), gamma));
        CHECK(norm_inf(mean - z) < 1e-9);
    }
}

TEST_CASE("hyper_estimate second moment is at most d under enumeration") {
    RngStream rng(15);
    for (int rep = 0; rep < 100; ++rep) {
        int d = 2 + rng.uniform_int(5);
        Vec a = random_interior(d, rng);
        double gamma = 0.05 + 0.6 * rng.uniform01();
        Vec z = random_l1_unit(d, rng);
        double expect = 0.0;
        for (const auto& ho : oracles::enumerate_hyper(a, gamma)) {
            Vec est = hyper_estimate(a, ho.outcome, dot(ho.outcome.played, z), gamma);
            double q = 0.0;
            for (int i = 0; i < d; ++i)
                q += (1.0 - a[static_cast<size_t>(i)] * a[static_cast<size_t>(i)]) * est[static_cast<size_t>(i)] * est[static_cast<size_t>(i)];
            expect += ho.prob * (1.0 - gamma) * q;
        }
        CHECK(expect <= d + 1e-9);
    }
}

TEST_CASE("hyper_perturb bias is at most gamma (exact enumeration)") {
    RngStream rng(17);
    for (int rep = 0; rep < 1000; ++rep) {
        int d = 1 + rng.uniform_int(5);
        Vec a = random_interior(d, rng, 0.95);
        double gamma = rng.uniform01() * 0.9;
        Vec mean = zeros(d);
        for (const auto& ho : oracles::enumerate_hyper(a, gamma)) add_scaled(mean, ho.prob, ho.outcome.played);
        CHECK(norm_inf(mean - a) <= gamma + 1e-12);
        // and the mean is exactly (1-gamma) a
        CHECK(norm_inf(mean - (1.0 - gamma) * a) < 1e-12);
    }
}

TEST_CASE("hyper_estimate range guard") {
    // exploration hit next to a corner: |estimate| ~ d/gamma, so a large eta
    // must trip the guard
    Vec a = {0.999, 0.999};
    HypercubePerturbOutcome o;
    o.was_exploration = true;
    o.basis_index = 0;
    o.sign = 1;
    o.played = basis_vector(2, 0, 1.0);
    CHECK_THROWS_AS(hyper_estimate(a, o, 1.0, 0.01, /*eta=*/1.0), RangeViolation);
    CHECK_THROWS_AS(hyper_estimate(a, o, 1.5, 0.01), RangeViolation);  // loss outside the dual range
}

TEST_CASE("hyper_params") {
    HyperParams p = hyper_params(10000, 5);
    CHECK(p.eta == doctest::Approx(std::sqrt(std::log(2.0) / 30000.0)).epsilon(1e-12));
    CHECK(p.gamma == doctest::Approx(10.0 * std::sqrt(std::log(2.0) / 30000.0)).epsilon(1e-12));
    CHECK(p.gamma == doctest::Approx(0.0481).epsilon(1e-3));
    CHECK(!p.clamped);
    CHECK(p.eta * 5 / p.gamma == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(hyper_params(10, 10, /*strict=*/true), HorizonTooSmall);
    HyperParams clamped = hyper_params(10, 10);
    CHECK(clamped.clamped);
    CHECK(clamped.gamma == 0.5);
    CHECK(clamped.eta * 10 / clamped.gamma == doctest::Approx(0.5).epsilon(1e-12));

    // the ratio eta d / gamma is parameter-free at the tuned values
    for (long n : {100L, 5000L, 123456L})
        for (int d : {1, 3, 8}) {
            HyperParams q = hyper_params(n, d);
            CHECK(q.eta * d / q.gamma == doctest::Approx(0.5).epsilon(1e-12));
        }
}

TEST_CASE("bregman inequality of the entropic dual under small steps") {
    RngStream rng(19);
    HypercubeRegularizer reg(4);
    int checked = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        Vec v = oracles::random_vec(4, rng, 3.0);
        Vec delta(4);
        for (double& x : delta) x = rng.uniform01() - 0.5;  // ||u - v||_inf <= 1/2
        Vec u = v + delta;
        double lhs = bregman_dual(reg, u, v);
        double rhs = 0.0;
        for (int i = 0; i < 4; ++i) {
            double th = std::tanh(v[static_cast<size_t>(i)]);
            rhs += (1.0 - th * th) * delta[static_cast<size_t>(i)] * delta[static_cast<size_t>(i)];
        }
        CHECK(lhs <= rhs + 1e-9);
        ++checked;
    }
    CHECK(checked == 10000);
}
