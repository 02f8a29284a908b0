#include "banlin/exp2.hpp"

#include <algorithm>
#include <cmath>

#include "banlin/errors.hpp"

namespace banlin {

namespace {

void normalize_log_weights(Vec& logw) {
    double m = *std::max_element(logw.begin(), logw.end());
    double sum = 0.0;
    for (double lw : logw) sum += std::exp(lw - m);
    double lse = m + std::log(sum);
    for (double& lw : logw) lw -= lse;
}

void build_caches(Exp2State& s) {
    const Metric& metric = s.actions->metric;
    s.metric_actions.clear();
    s.sqrt_actions.clear();
    for (const Vec& a : s.actions->actions) {
        s.metric_actions.push_back(metric.shape().apply(a));
        s.sqrt_actions.push_back(metric.sqrt().apply(a));
    }
}

Vec john_to_index_distribution(const JohnExploration& john, size_t num_actions) {
    Vec mu(num_actions, 0.0);
    for (size_t k = 0; k < john.action_indices.size(); ++k)
        mu[static_cast<size_t>(john.action_indices[k])] += john.weights[k];
    return mu;
}

}  // namespace

Exp2State exp2_make_state(std::shared_ptr<const PreprocessedActions> actions, Vec exploration,
                          double eta, double gamma, bool relax) {
    const size_t n_actions = actions->actions.size();
    if (n_actions < 2) throw std::invalid_argument("exp2: need at least 2 actions");
    if (exploration.size() != n_actions) throw std::invalid_argument("exp2: exploration size mismatch");
    if (!(eta > 0.0)) throw std::invalid_argument("exp2: eta must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("exp2: gamma must be in [0,1)");
    if (!relax && eta * actions->rank / std::max(gamma, 1e-300) > 1.0 + 1e-12)
        throw RangeViolation("exp2: eta d / gamma must be at most 1");

    Exp2State s;
    s.actions = std::move(actions);
    s.log_weights = Vec(n_actions, -std::log(static_cast<double>(n_actions)));
    s.eta = eta;
    s.gamma = gamma;
    s.exploration = std::move(exploration);
    build_caches(s);
    return s;
}

Exp2State exp2_init_with_exploration(std::shared_ptr<const PreprocessedActions> actions,
                                     Vec exploration, long n, bool strict) {
    if (n < 1) throw std::invalid_argument("exp2_init: horizon must be >= 1");
    const double num = static_cast<double>(actions->actions.size());
    const int d = actions->rank;
    double eta = std::sqrt(std::log(num) / (3.0 * static_cast<double>(n) * d));
    double gamma = eta * d;
    bool clamped = false;
    if (gamma > 0.5) {
        if (strict) throw HorizonTooSmall("exp2_init: gamma = eta d exceeds 1/2 at this horizon");
        gamma = 0.5;
        eta = gamma / d;  // keep eta d / gamma = 1
        clamped = true;
    }
    Exp2State s = exp2_make_state(std::move(actions), std::move(exploration), eta, gamma);
    s.clamped = clamped;
    return s;
}

Exp2State exp2_init(std::shared_ptr<const PreprocessedActions> actions, long n, bool strict) {
    JohnExploration john = john_weights(*actions);
    Vec mu = john_to_index_distribution(john, actions->actions.size());
    return exp2_init_with_exploration(std::move(actions), std::move(mu), n, strict);
}

Vec exp2_probabilities(const Exp2State& s) {
    Vec p(s.log_weights.size());
    for (size_t i = 0; i < p.size(); ++i)
        p[i] = (1.0 - s.gamma) * std::exp(s.log_weights[i]) + s.gamma * s.exploration[i];
    return p;
}

Matrix exp2_cov(const Exp2State& s) {
    const int d = s.rank();
    Vec p = exp2_probabilities(s);
    Matrix op(d, d);
    for (size_t i = 0; i < p.size(); ++i) {
        const Vec& a = s.actions->actions[i];
        const Vec& ha = s.metric_actions[i];
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) op(r, c) += p[i] * a[static_cast<size_t>(r)] * ha[static_cast<size_t>(c)];
    }
    return op;
}

SymMatrix exp2_cov_sym(const Exp2State& s) {
    const int d = s.rank();
    Vec p = exp2_probabilities(s);
    Matrix m(d, d);
    for (size_t i = 0; i < p.size(); ++i) {
        const Vec& sa = s.sqrt_actions[i];
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) m(r, c) += p[i] * sa[static_cast<size_t>(r)] * sa[static_cast<size_t>(c)];
    }
    return SymMatrix(std::move(m), 1e-6);
}

Vec exp2_estimate(const Exp2State& s, int played_index, double loss) {
    if (std::abs(loss) > 1.0 + 1e-9) throw RangeViolation("exp2_estimate: |loss| exceeds the dual range");
    SymMatrix c = exp2_cov_sym(s);
    SpectralDecomp dec = sym_eig(c);
    if (dec.eigenvalues.back() <= 1e-13 * std::max(dec.eigenvalues.front(), 0.0))
        throw SingularCovariance("exp2_estimate: play covariance is singular (rank-deficient actions?)");

    // estimate = loss * H^{-1/2} C^{-1} H^{1/2} a'_played
    const Vec& sa = s.sqrt_actions[static_cast<size_t>(played_index)];
    Vec tmp = dec.eigenvectors.apply_transposed(sa);
    for (size_t k = 0; k < tmp.size(); ++k) tmp[k] /= dec.eigenvalues[k];
    Vec cinv_sa = dec.eigenvectors.apply(tmp);
    return loss * s.actions->metric.inv_sqrt().apply(cinv_sa);
}

void exp2_update(Exp2State& s, const Vec& estimate) {
    const size_t n = s.log_weights.size();
    Vec inner(n);
    for (size_t i = 0; i < n; ++i) {
        inner[i] = dot(s.metric_actions[i], estimate);
        if (s.eta * std::abs(inner[i]) > 1.0 + 1e-9)
            throw RangeViolation("exp2_update: eta |<a, estimate>| exceeded 1 (check gamma/eta configuration)");
    }
    for (size_t i = 0; i < n; ++i) s.log_weights[i] -= s.eta * inner[i];
    normalize_log_weights(s.log_weights);
}

double exp2_second_moment(const Exp2State& s, const Vec& estimate) {
    Vec p = exp2_probabilities(s);
    double sum = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        double inner = dot(s.metric_actions[i], estimate);
        sum += p[i] * inner * inner;
    }
    return sum;
}

Exp2Policy::Exp2Policy(std::shared_ptr<const PreprocessedActions> actions, long n, bool strict)
    : state_(exp2_init(std::move(actions), n, strict)) {
    last_estimate_ = zeros(state_.rank());
}

Exp2Policy::Exp2Policy(Exp2State state) : state_(std::move(state)) {
    last_estimate_ = zeros(state_.rank());
}

Exp2Policy::Exp2Policy(std::shared_ptr<const PreprocessedActions> actions, double eta, double gamma, bool relax)
    : state_([&] {
          JohnExploration john = john_weights(*actions);
          Vec mu = john_to_index_distribution(john, actions->actions.size());
          return exp2_make_state(actions, std::move(mu), eta, gamma, relax);
      }()) {
    last_estimate_ = zeros(state_.rank());
}

Vec Exp2Policy::play(RngStream& rng) {
    pending_ = exp2_sample(state_, rng);
    return state_.actions->original[static_cast<size_t>(pending_.index)];
}

Vec Exp2Policy::loss_query_point() const {
    return state_.actions->original[static_cast<size_t>(pending_.index)] - state_.actions->center();
}

void Exp2Policy::observe(double loss) {
    last_estimate_ = exp2_estimate(state_, pending_.index, loss);
    last_second_moment_ = exp2_second_moment(state_, last_estimate_);
    exp2_update(state_, last_estimate_);
}

double Exp2Policy::certificate_constant(long n) const {
    return 2.0 * state_.gamma * static_cast<double>(n) +
           std::log(static_cast<double>(state_.num_actions())) / state_.eta;
}

ExpertsRoundResult experts_round(const std::vector<Vec>& suggestions, const Vec& expert_log_weights,
                                 double eta, double gamma, const LossFn& loss_fn, RngStream& rng) {
    const size_t n_experts = suggestions.size();
    if (n_experts < 2) throw std::invalid_argument("experts_round: need at least 2 experts");
    if (expert_log_weights.size() != n_experts) throw std::invalid_argument("experts_round: weight size mismatch");

    ExpertsRoundResult out;
    out.log_weights = expert_log_weights;

    // All suggestions identical: no information in the choice. Charge the
    // common loss and leave the weights alone.
    double scale = std::max(1.0, norm_inf(suggestions.front()));
    double spread = 0.0;
    for (const Vec& a : suggestions) spread = std::max(spread, norm_inf(a - suggestions.front()));
    if (spread <= 1e-12 * scale) {
        Vec p(n_experts);
        for (size_t i = 0; i < n_experts; ++i)
            p[i] = (1.0 - gamma) * std::exp(expert_log_weights[i]) + gamma / static_cast<double>(n_experts);
        out.degenerate = true;
        out.chosen = rng.categorical(p);
        out.realized_loss = loss_fn(suggestions[static_cast<size_t>(out.chosen)]);
        return out;
    }

    auto pre = std::make_shared<const PreprocessedActions>(preprocess(suggestions));
    JohnExploration john = john_weights(*pre);
    Vec mu(n_experts, 0.0);
    for (size_t k = 0; k < john.action_indices.size(); ++k)
        mu[static_cast<size_t>(john.action_indices[k])] += john.weights[k];

    Exp2State state = exp2_make_state(pre, std::move(mu), eta, gamma, /*relax=*/true);
    state.log_weights = expert_log_weights;

    Exp2Sample sample = exp2_sample(state, rng);
    out.chosen = sample.index;
    out.exploration = sample.exploration;
    out.realized_loss = loss_fn(suggestions[static_cast<size_t>(sample.index)]);

    Vec center = pre->center();
    double centered_loss = out.realized_loss;
    if (norm_inf(center) > 1e-12 * scale)
        centered_loss = loss_fn(suggestions[static_cast<size_t>(sample.index)] - center);

    Vec estimate = exp2_estimate(state, sample.index, centered_loss);
    out.second_moment = exp2_second_moment(state, estimate);
    exp2_update(state, estimate);
    out.log_weights = state.log_weights;
    return out;
}

}  // namespace banlin
