#include "banlin/hypercube.hpp"

#include <cmath>
#include <limits>

#include "banlin/errors.hpp"

namespace banlin {

namespace {

// x log x with the 0 log 0 = 0 convention.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// log cosh without overflow for large |u|.
double log_cosh(double u) {
    double a = std::abs(u);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

constexpr double kInteriorClip = 1.0 - 1e-12;

}  // namespace

double entropic_f(const Vec& x) {
    double sum = 0.0;
    for (double xi : x) {
        if (std::abs(xi) > 1.0) return std::numeric_limits<double>::infinity();
        sum += 0.5 * (xlogx(1.0 + xi) + xlogx(1.0 - xi));
    }
    return sum;
}

Vec entropic_grad(const Vec& x) {
    Vec g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) >= 1.0) throw DomainEscape("entropic_grad: point not in the open cube");
        g[i] = std::atanh(x[i]);
    }
    return g;
}

double entropic_dual(const Vec& u) {
    double sum = 0.0;
    for (double ui : u) sum += log_cosh(ui);
    return sum;
}

Vec entropic_dual_grad(const Vec& u) {
    Vec g(u.size());
    for (size_t i = 0; i < u.size(); ++i) g[i] = std::tanh(u[i]);
    return g;
}

HypercubePerturbOutcome hyper_perturb(const Vec& a, double gamma, RngStream& rng) {
    const int d = static_cast<int>(a.size());
    HypercubePerturbOutcome out;
    if (gamma > 0.0 && rng.uniform01() < gamma) {
        out.was_exploration = true;
        out.basis_index = rng.uniform_int(d);
        out.sign = rng.sign();
        out.played = basis_vector(d, out.basis_index, out.sign);
        return out;
    }
    out.played.resize(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        double ai = std::clamp(a[i], -kInteriorClip, kInteriorClip);
        out.played[i] = rng.uniform01() < 0.5 * (1.0 + ai) ? 1.0 : -1.0;
    }
    return out;
}

Matrix hyper_pt(const Vec& a, double gamma) {
    const int d = static_cast<int>(a.size());
    Matrix p(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) p(i, j) = (1.0 - gamma) * a[static_cast<size_t>(i)] * a[static_cast<size_t>(j)];
        p(i, i) = gamma / d + (1.0 - gamma);  // rank-one diagonal and (1 - a_i^2) term collapse
    }
    return p;
}

Vec hyper_estimate(const Vec& a, const HypercubePerturbOutcome& outcome, double loss,
                   double gamma, double eta) {
    const int d = static_cast<int>(a.size());
    if (std::abs(loss) > 1.0 + 1e-9) throw RangeViolation("hyper_estimate: |loss| exceeds the dual range");

    // P = D + (1-gamma) a a^T with D diagonal; Sherman-Morrison gives the
    // solve in O(d).
    Vec dinv(static_cast<size_t>(d));
    Vec dinv_a(static_cast<size_t>(d));
    double a_dinv_a = 0.0;
    for (int i = 0; i < d; ++i) {
        double ai = a[static_cast<size_t>(i)];
        double diag = gamma / d + (1.0 - gamma) * (1.0 - ai * ai);
        dinv[static_cast<size_t>(i)] = 1.0 / diag;
        dinv_a[static_cast<size_t>(i)] = ai / diag;
        a_dinv_a += ai * ai / diag;
    }
    double denom = 1.0 + (1.0 - gamma) * a_dinv_a;

    Vec rhs = loss * outcome.played;
    double a_dinv_rhs = 0.0;
    for (int i = 0; i < d; ++i) a_dinv_rhs += dinv_a[static_cast<size_t>(i)] * rhs[static_cast<size_t>(i)];
    Vec est(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i)
        est[static_cast<size_t>(i)] = dinv[static_cast<size_t>(i)] * rhs[static_cast<size_t>(i)] - (1.0 - gamma) * a_dinv_rhs / denom * dinv_a[static_cast<size_t>(i)];

    if (eta > 0.0 && eta * norm_inf(est) > 0.5 + 1e-9)
        throw RangeViolation("hyper_estimate: eta * ||estimate||_inf exceeded 1/2");
    return est;
}

HyperParams hyper_params(long n, int d, bool strict) {
    if (n < 1) throw std::invalid_argument("hyper_params: n must be >= 1");
    HyperParams p;
    p.eta = std::sqrt(std::log(2.0) / (3.0 * static_cast<double>(n)));
    p.gamma = 2.0 * d * p.eta;
    if (p.gamma > 0.5) {
        if (strict)
            throw HorizonTooSmall("hyper_params: n < (16/3) d^2 log 2, gamma formula exceeds 1/2");
        p.gamma = 0.5;
        p.eta = p.gamma / (2.0 * d);  // keep eta d / gamma = 1/2
        p.clamped = true;
    }
    return p;
}

HypercubePolicy::HypercubePolicy(int d, long n, bool strict) : d_(d) {
    HyperParams p = hyper_params(n, d, strict);
    gamma_ = p.gamma;
    clamped_ = p.clamped;
    state_ = osmd_init(std::make_shared<HypercubeRegularizer>(d), p.eta);
    round_action_ = state_.current_action;
    last_estimate_ = zeros(d);
    pending_.played = zeros(d);
}

HypercubePolicy::HypercubePolicy(int d, double eta, double gamma) : d_(d), gamma_(gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("HypercubePolicy: gamma must be in [0,1)");
    state_ = osmd_init(std::make_shared<HypercubeRegularizer>(d), eta);
    round_action_ = state_.current_action;
    last_estimate_ = zeros(d);
    pending_.played = zeros(d);
}

Vec HypercubePolicy::play(RngStream& rng) {
    round_action_ = state_.current_action;
    pending_ = hyper_perturb(round_action_, gamma_, rng);
    return pending_.played;
}

void HypercubePolicy::observe(double loss) {
    last_estimate_ = hyper_estimate(round_action_, pending_, loss, gamma_, state_.eta);
    Vec u_prev = -state_.eta * state_.cum_estimate;
    osmd_step(state_, last_estimate_);
    Vec u_next = -state_.eta * state_.cum_estimate;
    last_bregman_ = bregman_dual(*state_.reg, u_next, u_prev);
}

double HypercubePolicy::certificate_round_term(const Vec& z) const {
    // D_{F*} term plus the perturbation bias gamma ||a_t||_inf ||z||_1,
    // both evaluated at the action the round was played from.
    double bias = gamma_ * norm_inf(round_action_) * norm1(z);
    return last_bregman_ / state_.eta + bias;
}

double HypercubePolicy::certificate_constant(long) const {
    return state_.reg->range_sup() / state_.eta;
}

}  // namespace banlin
