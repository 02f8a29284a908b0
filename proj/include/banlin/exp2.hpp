#pragma once

#include <functional>
#include <memory>

#include "banlin/env.hpp"
#include "banlin/geometry.hpp"
#include "banlin/linalg.hpp"
#include "banlin/osmd.hpp"
#include "banlin/rng.hpp"

// Exponential weights over a finite action set with an exploration mixture,
// run in the MVEE coordinates produced by preprocess(). With John's
// exploration the play covariance dominates (gamma/d) I in the metric, so
// the importance-weighted estimates stay inside the exponential-weight
// stability range eta |<a, estimate>| <= 1.

namespace banlin {

struct Exp2State {
    std::shared_ptr<const PreprocessedActions> actions;
    Vec log_weights;  // log q, kept normalized (logsumexp == 0)
    double eta = 0.0;
    double gamma = 0.0;
    Vec exploration;  // mu over action indices
    bool clamped = false;

    // caches: H a'_i and H^{1/2} a'_i
    std::vector<Vec> metric_actions;
    std::vector<Vec> sqrt_actions;

    int num_actions() const { return static_cast<int>(actions->actions.size()); }
    int rank() const { return actions->rank; }
};

// Uniform initial weights; eta = sqrt(log N / (3 n d)) and gamma = eta d.
// If gamma exceeds 1/2 the pair is clamped keeping eta d / gamma = 1 (strict
// mode raises HorizonTooSmall instead). The exploration distribution is
// John's unless an explicit one is supplied.
Exp2State exp2_init(std::shared_ptr<const PreprocessedActions> actions, long n, bool strict = false);
Exp2State exp2_init_with_exploration(std::shared_ptr<const PreprocessedActions> actions,
                                     Vec exploration, long n, bool strict = false);
// Fully explicit parameters (overrides); checks eta d / gamma <= 1 + 1e-12
// unless relax is set.
Exp2State exp2_make_state(std::shared_ptr<const PreprocessedActions> actions, Vec exploration,
                          double eta, double gamma, bool relax = false);

Vec exp2_probabilities(const Exp2State& s);  // (1-gamma) q + gamma mu

struct Exp2Sample {
    int index = 0;
    bool exploration = false;
};

// Mixture sampling: an exploration branch with probability gamma, then a
// categorical draw within the branch. Marginally this is exactly p_t.
template <typename Rng>
Exp2Sample exp2_sample(const Exp2State& s, Rng& rng) {
    Exp2Sample out;
    if (s.gamma > 0.0 && rng.uniform01() < s.gamma) {
        out.exploration = true;
        out.index = rng.categorical(s.exploration);
        return out;
    }
    Vec q(s.log_weights.size());
    for (size_t i = 0; i < q.size(); ++i) q[i] = std::exp(s.log_weights[i]);
    out.index = rng.categorical(q);
    return out;
}

// Play covariance as an operator in the metric: sum_i p_i a'_i a'_i^T H.
Matrix exp2_cov(const Exp2State& s);
// Same operator conjugated by H^{1/2}, which makes it symmetric PSD.
SymMatrix exp2_cov_sym(const Exp2State& s);

// Importance-weighted loss-vector estimate from the single observed scalar:
// P_t^{-1} (loss * a'_played). Unbiased over the play distribution.
Vec exp2_estimate(const Exp2State& s, int played_index, double loss);

// Multiplicative weight update by exp(-eta <a_i, estimate>); raises
// RangeViolation when eta |<a_i, estimate>| exceeds 1 for some action.
void exp2_update(Exp2State& s, const Vec& estimate);

// sum_i p_i <a_i, estimate>^2, the per-round variance proxy entering the
// exponential-weights regret certificate.
double exp2_second_moment(const Exp2State& s, const Vec& estimate);

// Policy wrapper for the game loop ------------------------------------------

class Exp2Policy final : public Policy {
public:
    // Preprocesses the points and builds John's exploration.
    Exp2Policy(std::shared_ptr<const PreprocessedActions> actions, long n, bool strict = false);
    Exp2Policy(std::shared_ptr<const PreprocessedActions> actions, double eta, double gamma, bool relax = false);
    explicit Exp2Policy(Exp2State state);  // reuse a prepared state (replicates share one preprocessing)

    std::string name() const override { return "exp2_john"; }
    int dim() const override { return static_cast<int>(state_.actions->original.front().size()); }

    Vec play(RngStream& rng) override;
    Vec loss_query_point() const override;
    void observe(double loss) override;

    Vec internal_action() const override { return state_.actions->actions[static_cast<size_t>(pending_.index)]; }
    Vec last_estimate() const override { return last_estimate_; }
    bool last_was_exploration() const override { return pending_.exploration; }

    double certificate_round_term(const Vec& z) const override { (void)z; return last_second_moment_ * state_.eta; }
    double certificate_constant(long n) const override;

    const Exp2State& state() const { return state_; }

private:
    Exp2State state_;
    Exp2Sample pending_;
    Vec last_estimate_;
    double last_second_moment_ = 0.0;
};

// Bandits with expert advice -------------------------------------------------

// Evaluates z_t . point at an arbitrary point of the suggestion hull. Called
// at the played suggestion and, when the per-round MVEE center is nonzero,
// at played - center to obtain the recentered scalar for estimation.
using LossFn = std::function<double(const Vec& point)>;

struct ExpertsRoundResult {
    int chosen = 0;
    double realized_loss = 0.0;
    Vec log_weights;
    bool exploration = false;
    bool degenerate = false;   // all suggestions coincided; weights untouched
    double second_moment = 0.0;  // sum_k p_k <a_k, estimate>^2 of the round
};

// One round of exponential weights over experts: preprocess the suggestion
// set, build John's exploration over the experts whose suggestion touches
// the ellipsoid (experts sharing a suggestion split its weight equally),
// sample, estimate in the round's coordinates and update the weights.
ExpertsRoundResult experts_round(const std::vector<Vec>& suggestions, const Vec& expert_log_weights,
                                 double eta, double gamma, const LossFn& loss_fn, RngStream& rng);

}  // namespace banlin
