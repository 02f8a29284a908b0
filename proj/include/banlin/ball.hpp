#pragma once

#include <memory>

#include "banlin/env.hpp"
#include "banlin/linalg.hpp"
#include "banlin/osmd.hpp"
#include "banlin/rng.hpp"

// Mirror descent on the Euclidean unit ball against unit-ball losses.
//
// Regularizer: F(x) = -log(1 - ||x||) - ||x||, with
//   grad F(x)  = x / (1 - ||x||)
//   F*(u)      = -log(1 + ||u||) + ||u||
//   grad F*(u) = u / (1 + ||u||)
// The play is either the radial projection of the iterate (with
// probability ||a||) or a random signed basis vector; estimates are built
// only on the basis branch, which keeps them exactly unbiased.

namespace banlin {

double ball_f(const Vec& x);
Vec ball_grad(const Vec& x);
double ball_dual(const Vec& u);
Vec ball_dual_grad(const Vec& u);

struct BallPerturbOutcome {
    Vec played;            // always unit norm
    bool xi = false;       // true: radial branch, false: basis branch
    int basis_index = -1;  // set on the basis branch
    int sign = 0;
};

BallPerturbOutcome ball_perturb(const Vec& a, RngStream& rng);

// Zero on the radial branch; d / (1 - ||a||) * loss * played otherwise.
// NumericalBlowup when 1 - ||a|| underflows below 1e-12.
Vec ball_estimate(const Vec& a, const BallPerturbOutcome& outcome, double loss);

struct BallParams {
    double eta = 0.0;
    double gamma = 0.0;
};

// gamma = 1/sqrt(n), eta = sqrt(log n / (2 n d)). Strict mode enforces the
// eta d <= 1/2 condition (equivalently n >= 2 d log n).
BallParams ball_params(long n, int d, bool strict = false);

class BallRegularizer final : public Regularizer {
public:
    // comparator_radius is the radius of the comparator set the regret
    // certificate charges range_sup over (1 - gamma in the tuned setup).
    explicit BallRegularizer(int d, double comparator_radius = 1.0 - 1e-9);

    int dim() const override { return d_; }
    double value(const Vec& x) const override { return ball_f(x); }
    Vec grad(const Vec& x) const override { return ball_grad(x); }
    double dual_value(const Vec& u) const override { return ball_dual(u); }
    Vec dual_grad(const Vec& u) const override { return ball_dual_grad(u); }
    Vec min_point() const override { return zeros(d_); }
    double range_sup() const override;
    bool in_domain_closure(const Vec& x, double tol) const override { return norm2(x) <= 1.0 + tol; }

private:
    int d_;
    double comparator_radius_;
};

class BallPolicy final : public Policy {
public:
    BallPolicy(int d, long n, bool strict = false, bool project_to_shrunk_ball = false);
    BallPolicy(int d, double eta, double gamma, bool project_to_shrunk_ball = false);

    std::string name() const override { return "osmd_ball"; }
    int dim() const override { return d_; }

    Vec play(RngStream& rng) override;
    Vec loss_query_point() const override { return pending_.played; }
    void observe(double loss) override;

    Vec internal_action() const override { return round_action_; }
    Vec last_estimate() const override { return last_estimate_; }
    bool last_was_exploration() const override { return !pending_.xi; }

    double certificate_round_term(const Vec& z) const override;
    double certificate_constant(long n) const override;

    double eta() const { return state_.eta; }
    double gamma() const { return gamma_; }
    const OsmdState& state() const { return state_; }

private:
    int d_;
    double gamma_;
    bool project_ = false;  // optionally clip the iterate to norm 1 - gamma
    OsmdState state_;
    Vec round_action_;
    BallPerturbOutcome pending_;
    Vec last_estimate_;
    double last_bregman_ = 0.0;
};

}  // namespace banlin
