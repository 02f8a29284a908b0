#include "banlin/ball.hpp"

#include <cmath>

#include "banlin/errors.hpp"

namespace banlin {

double ball_f(const Vec& x) {
    double n = norm2(x);
    if (n >= 1.0) throw DomainEscape("ball_f: ||x|| must be < 1");
    return -std::log1p(-n) - n;
}

Vec ball_grad(const Vec& x) {
    double n = norm2(x);
    if (n >= 1.0) throw DomainEscape("ball_grad: ||x|| must be < 1");
    return (1.0 / (1.0 - n)) * x;
}

double ball_dual(const Vec& u) {
    double n = norm2(u);
    return -std::log1p(n) + n;
}

Vec ball_dual_grad(const Vec& u) {
    double n = norm2(u);
    return (1.0 / (1.0 + n)) * u;
}

BallPerturbOutcome ball_perturb(const Vec& a, RngStream& rng) {
    const int d = static_cast<int>(a.size());
    double n = norm2(a);
    if (n >= 1.0) throw DomainEscape("ball_perturb: ||a|| must be < 1");

    BallPerturbOutcome out;
    if (n > 0.0 && rng.uniform01() < n) {
        out.xi = true;
        out.played = (1.0 / n) * a;
        return out;
    }
    out.basis_index = rng.uniform_int(d);
    out.sign = rng.sign();
    out.played = basis_vector(d, out.basis_index, out.sign);
    return out;
}

Vec ball_estimate(const Vec& a, const BallPerturbOutcome& outcome, double loss) {
    const int d = static_cast<int>(a.size());
    if (std::abs(loss) > 1.0 + 1e-9) throw RangeViolation("ball_estimate: |loss| exceeds the dual range");
    if (outcome.xi) return zeros(d);
    double slack = 1.0 - norm2(a);
    if (slack < 1e-12) throw NumericalBlowup("ball_estimate: 1 - ||a|| below 1e-12");
    return (static_cast<double>(d) / slack * loss) * outcome.played;
}

BallParams ball_params(long n, int d, bool strict) {
    if (n < 2) throw std::invalid_argument("ball_params: n must be >= 2");
    BallParams p;
    p.gamma = 1.0 / std::sqrt(static_cast<double>(n));
    p.eta = std::sqrt(std::log(static_cast<double>(n)) / (2.0 * static_cast<double>(n) * d));
    if (strict && p.eta * d > 0.5)
        throw HorizonTooSmall("ball_params: eta d > 1/2 (n < 2 d log n)");
    return p;
}

BallRegularizer::BallRegularizer(int d, double comparator_radius)
    : d_(d), comparator_radius_(comparator_radius) {
    if (!(comparator_radius > 0.0 && comparator_radius < 1.0))
        throw std::invalid_argument("BallRegularizer: comparator radius must be in (0,1)");
}

double BallRegularizer::range_sup() const {
    // sup over ||a|| <= r of F, and F(0) = 0.
    return -std::log1p(-comparator_radius_) - comparator_radius_;
}

BallPolicy::BallPolicy(int d, long n, bool strict, bool project)
    : d_(d), project_(project) {
    BallParams p = ball_params(n, d, strict);
    gamma_ = p.gamma;
    state_ = osmd_init(std::make_shared<BallRegularizer>(d, 1.0 - p.gamma), p.eta);
    round_action_ = state_.current_action;
    last_estimate_ = zeros(d);
    pending_.played = zeros(d);
}

BallPolicy::BallPolicy(int d, double eta, double gamma, bool project)
    : d_(d), gamma_(gamma), project_(project) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("BallPolicy: gamma must be in (0,1)");
    state_ = osmd_init(std::make_shared<BallRegularizer>(d, 1.0 - gamma), eta);
    round_action_ = state_.current_action;
    last_estimate_ = zeros(d);
    pending_.played = zeros(d);
}

Vec BallPolicy::play(RngStream& rng) {
    round_action_ = state_.current_action;
    pending_ = ball_perturb(round_action_, rng);
    return pending_.played;
}

void BallPolicy::observe(double loss) {
    last_estimate_ = ball_estimate(round_action_, pending_, loss);
    Vec u_prev = -state_.eta * state_.cum_estimate;
    osmd_step(state_, last_estimate_);
    Vec u_next = -state_.eta * state_.cum_estimate;
    last_bregman_ = bregman_dual(*state_.reg, u_next, u_prev);
    if (project_) {
        // Optional literal reading: clip the iterate to the shrunk ball of
        // radius 1 - gamma. The mirror update itself never needs this.
        double n = norm2(state_.current_action);
        if (n > 1.0 - gamma_) state_.current_action = ((1.0 - gamma_) / n) * state_.current_action;
    }
}

double BallPolicy::certificate_round_term(const Vec& z) const {
    (void)z;  // the perturbation is exactly unbiased, no bias term
    return last_bregman_ / state_.eta;
}

double BallPolicy::certificate_constant(long n) const {
    // Comparing against the full unit ball costs gamma per round on top of
    // the range term over the shrunk comparator set.
    return gamma_ * static_cast<double>(n) + state_.reg->range_sup() / state_.eta;
}

}  // namespace banlin
