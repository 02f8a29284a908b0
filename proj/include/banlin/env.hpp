#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "banlin/geometry.hpp"
#include "banlin/linalg.hpp"
#include "banlin/rng.hpp"

// Game loop: action sets paired with their dual loss sets, adversaries,
// bandit policies, trajectory simulation and regret accounting.
//
// Dual pairing enforced here: finite sets use the induced loss set
// {z : |a.z| <= 1 and |(a - c).z| <= 1 for all actions a}, where c is the
// preprocessing center (for centrally symmetric sets the two conditions
// coincide); the hypercube pairs with the L1 ball and the Euclidean ball
// with itself.

namespace banlin {

enum class SetKind { finite, hypercube, ball };

struct ActionSet {
    SetKind kind = SetKind::finite;
    int dim = 0;
    std::vector<Vec> points;  // finite sets only

    static ActionSet cross_polytope(int d);
    static ActionSet hypercube_corners(int d);  // all 2^d sign vectors
    static ActionSet finite(std::vector<Vec> pts);
    static ActionSet hypercube(int d);
    static ActionSet ball(int d);
};

struct BestAction {
    Vec action;
    double value;  // minimal cumulative loss a . Z
};

// Minimizer of a . Z over the set. Ties on the hypercube resolve with
// sign(0) = +1; Z = 0 on the ball returns the center.
BestAction best_action(const ActionSet& set, const Vec& cumulative_z);

// Adversaries ----------------------------------------------------------------

class Adversary {
public:
    virtual ~Adversary() = default;
    // prev_played is the previously played point in original coordinates
    // (zeros on round 1); oblivious kinds must ignore it.
    virtual Vec next(long t, const Vec& prev_played, RngStream& rng) = 0;
    virtual bool oblivious() const = 0;
    // E[z_t]; only meaningful for oblivious kinds.
    virtual Vec expected_z(long t) const = 0;
    virtual std::string name() const = 0;
};

std::shared_ptr<Adversary> make_fixed_adversary(Vec z);
std::shared_ptr<Adversary> make_iid_l1_vertex_adversary(int d);   // uniform over +-e_i
std::shared_ptr<Adversary> make_iid_sphere_adversary(int d);      // uniform on the unit sphere
std::shared_ptr<Adversary> make_rotating_adversary(int d, double omega);  // unit vector rotating in the (e1,e2) plane
std::shared_ptr<Adversary> make_sequence_adversary(std::vector<Vec> rows);  // SequenceExhausted past the last row
// Picks the feasible loss most aligned with the previously played point:
// the worst L1-ball vertex for the hypercube, the unit vector along the
// play for the ball, the scaled play direction for finite sets.
std::shared_ptr<Adversary> make_adaptive_worst_adversary(SetKind kind);

// Environment ----------------------------------------------------------------

class Environment {
public:
    Environment(ActionSet set, std::shared_ptr<Adversary> adversary);

    const ActionSet& set() const { return set_; }
    const Adversary& adversary() const { return *adversary_; }
    Adversary& adversary() { return *adversary_; }
    // Preprocessing of a finite set (empty otherwise); shared so policies
    // and the feasibility check agree on the centering.
    const std::optional<PreprocessedActions>& preprocessed() const { return pre_; }

    // Draws z_t and enforces loss-set membership: generator outputs are
    // scaled into the induced dual set for finite sets, while file-backed
    // and fixed sequences are validated and rejected if infeasible.
    Vec draw_loss(long t, const Vec& prev_played, RngStream& rng);

    Vec expected_cumulative_z(long n) const;  // sum of E[z_t], oblivious only

private:
    void validate_member(const Vec& z) const;

    ActionSet set_;
    std::shared_ptr<Adversary> adversary_;
    std::optional<PreprocessedActions> pre_;
};

// Policies --------------------------------------------------------------------

// A bandit policy: play() commits to a point, then the environment answers
// with the scalar loss_query_point() . z_t, and observe() folds it in. The
// query point differs from the played point only for finite sets that need
// recentering (it is played - center, a difference of hull points), which
// keeps the feedback a single scalar per round.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;
    virtual int dim() const = 0;

    virtual Vec play(RngStream& rng) = 0;
    virtual Vec loss_query_point() const = 0;
    virtual void observe(double loss) = 0;

    virtual Vec internal_action() const = 0;
    virtual Vec last_estimate() const = 0;
    virtual bool last_was_exploration() const = 0;

    // Diagnostics for the regret certificate; z is available here because
    // the harness evaluates the certificate, not the policy's decisions.
    virtual double certificate_round_term(const Vec& z) const { (void)z; return 0.0; }
    virtual double certificate_constant(long n) const { (void)n; return 0.0; }
};

// Rounds and reports -----------------------------------------------------------

struct RoundRecord {
    long t = 0;
    Vec played;            // point actually played, original coordinates
    double realized_loss = 0.0;  // played . z_t
    Vec estimate;          // loss-vector estimate built from the feedback
    Vec internal_action;   // policy's internal iterate / distribution support point
    bool exploration = false;
    double cert_term = 0.0;  // per-round certificate contribution
};

// Runs n rounds; deterministic given (policy state, environment, stream).
// losses_out, when given, receives the hidden z_t sequence for reporting.
std::vector<RoundRecord> run_trajectory(Policy& policy, Environment& env, long n, RngStream& rng,
                                        std::vector<Vec>* losses_out = nullptr);

enum class BoundKind { exp2_john, hypercube, ball };

// Closed-form regret bounds evaluated at the run's parameters.
double theorem_bound(BoundKind kind, long n, int d, long num_actions);

struct RegretReport {
    std::vector<double> per_seed_cum_loss;
    std::vector<double> per_seed_pseudo_regret;
    Vec best_fixed_action;
    double best_fixed_value = 0.0;
    double mean_pseudo_regret = 0.0;
    double stderr_pseudo_regret = 0.0;
    double bound_value = 0.0;
    double certificate_value = 0.0;  // mean over seeds of per-seed certificates
    bool regret_is_realized = false; // true when the adversary is adaptive
};

// Pseudo-regret per seed is the realized cumulative loss minus the best
// fixed action against the expected loss sequence; with an adaptive
// adversary the per-seed realized sequence is used instead and the report
// is labeled accordingly.
RegretReport regret_report(const std::vector<std::vector<RoundRecord>>& per_seed_records,
                           const std::vector<std::vector<Vec>>& per_seed_losses,
                           const std::vector<double>& per_seed_certificates,
                           const Environment& env, BoundKind bound, long n, long num_actions);

}  // namespace banlin
