#pragma once

#include <memory>

#include "banlin/env.hpp"
#include "banlin/linalg.hpp"
#include "banlin/osmd.hpp"
#include "banlin/rng.hpp"

// Mirror descent on the hypercube [-1,1]^d against L1-ball losses.
//
// Regularizer: F(x) = 1/2 sum (1+x_i)log(1+x_i) + (1-x_i)log(1-x_i), the
// coordinatewise conjugate of log cosh; grad F* = tanh componentwise, so
// every update costs O(d). The played point is a random corner whose
// coordinatewise means track the iterate, mixed with probability gamma of
// a signed basis vector, which keeps the play covariance invertible.

namespace banlin {

double entropic_f(const Vec& x);        // +inf outside the closed cube
Vec entropic_grad(const Vec& x);        // atanh componentwise, open cube only
double entropic_dual(const Vec& u);     // sum log cosh u_i
Vec entropic_dual_grad(const Vec& u);   // tanh componentwise

struct HypercubePerturbOutcome {
    Vec played;              // corner of the cube, or +-e_i under exploration
    bool was_exploration = false;
    int basis_index = -1;    // set when was_exploration
    int sign = 0;
};

// Exploration branch with probability gamma; otherwise independent signs
// with P(+1) = (1 + a_i)/2 per coordinate, so E[played] = (1-gamma) a and
// the bias |E[played|a] - a| is at most gamma in every coordinate.
HypercubePerturbOutcome hyper_perturb(const Vec& a, double gamma, RngStream& rng);

// Closed form for the play covariance E[played played^T]:
//   (gamma/d) I + (1-gamma) a a^T + (1-gamma) diag(1 - a_i^2),
// whose smallest eigenvalue is at least gamma/d.
Matrix hyper_pt(const Vec& a, double gamma);

// Estimate P_t^{-1} * played * loss, solved in O(d) through the
// diagonal-plus-rank-one structure of P_t. When eta > 0 the range guard
// eta * ||estimate||_inf <= 1/2 is enforced (RangeViolation otherwise).
Vec hyper_estimate(const Vec& a, const HypercubePerturbOutcome& outcome, double loss,
                   double gamma, double eta = 0.0);

struct HyperParams {
    double eta = 0.0;
    double gamma = 0.0;
    bool clamped = false;
};

// gamma = 2d sqrt(log2 / 3n), eta = sqrt(log2 / 3n), so eta d / gamma = 1/2.
// When the formula pushes gamma past 1/2 the pair is clamped (keeping the
// ratio) unless strict, which raises HorizonTooSmall.
HyperParams hyper_params(long n, int d, bool strict = false);

class HypercubeRegularizer final : public Regularizer {
public:
    explicit HypercubeRegularizer(int d) : d_(d) {}

    int dim() const override { return d_; }
    double value(const Vec& x) const override { return entropic_f(x); }
    Vec grad(const Vec& x) const override { return entropic_grad(x); }
    double dual_value(const Vec& u) const override { return entropic_dual(u); }
    Vec dual_grad(const Vec& u) const override { return entropic_dual_grad(u); }
    Vec min_point() const override { return zeros(d_); }
    double range_sup() const override { return d_ * std::log(2.0); }
    bool in_domain_closure(const Vec& x, double tol) const override { return norm_inf(x) <= 1.0 + tol; }

private:
    int d_;
};

class HypercubePolicy final : public Policy {
public:
    HypercubePolicy(int d, long n, bool strict = false);
    HypercubePolicy(int d, double eta, double gamma);

    std::string name() const override { return "osmd_hypercube"; }
    int dim() const override { return d_; }

    Vec play(RngStream& rng) override;
    Vec loss_query_point() const override { return pending_.played; }
    void observe(double loss) override;

    Vec internal_action() const override { return round_action_; }
    Vec last_estimate() const override { return last_estimate_; }
    bool last_was_exploration() const override { return pending_.was_exploration; }

    double certificate_round_term(const Vec& z) const override;
    double certificate_constant(long n) const override;

    double eta() const { return state_.eta; }
    double gamma() const { return gamma_; }
    bool params_clamped() const { return clamped_; }
    const OsmdState& state() const { return state_; }

private:
    int d_;
    double gamma_;
    bool clamped_ = false;
    OsmdState state_;
    Vec round_action_;  // iterate the current round was played from
    HypercubePerturbOutcome pending_;
    Vec last_estimate_;
    double last_bregman_ = 0.0;
};

}  // namespace banlin
