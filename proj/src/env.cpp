#include "banlin/env.hpp"

#include <algorithm>
#include <cmath>

#include "banlin/errors.hpp"

namespace banlin {

ActionSet ActionSet::cross_polytope(int d) {
    ActionSet s;
    s.kind = SetKind::finite;
    s.dim = d;
    for (int i = 0; i < d; ++i) {
        s.points.push_back(basis_vector(d, i, 1.0));
        s.points.push_back(basis_vector(d, i, -1.0));
    }
    return s;
}

ActionSet ActionSet::hypercube_corners(int d) {
    if (d > 20) throw std::invalid_argument("hypercube_corners: 2^d too large");
    ActionSet s;
    s.kind = SetKind::finite;
    s.dim = d;
    for (long mask = 0; mask < (1L << d); ++mask) {
        Vec p(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) p[static_cast<size_t>(i)] = (mask >> i) & 1 ? 1.0 : -1.0;
        s.points.push_back(std::move(p));
    }
    return s;
}

ActionSet ActionSet::finite(std::vector<Vec> pts) {
    if (pts.empty()) throw EmptySet("ActionSet::finite: no points");
    ActionSet s;
    s.kind = SetKind::finite;
    s.dim = static_cast<int>(pts.front().size());
    s.points = std::move(pts);
    return s;
}

ActionSet ActionSet::hypercube(int d) { return ActionSet{SetKind::hypercube, d, {}}; }
ActionSet ActionSet::ball(int d) { return ActionSet{SetKind::ball, d, {}}; }

BestAction best_action(const ActionSet& set, const Vec& z) {
    switch (set.kind) {
        case SetKind::finite: {
            int best = 0;
            double best_val = dot(set.points.front(), z);
            for (size_t i = 1; i < set.points.size(); ++i) {
                double v = dot(set.points[i], z);
                if (v < best_val) {
                    best_val = v;
                    best = static_cast<int>(i);
                }
            }
            return {set.points[static_cast<size_t>(best)], best_val};
        }
        case SetKind::hypercube: {
            Vec a(z.size());
            for (size_t i = 0; i < z.size(); ++i) a[i] = z[i] >= 0.0 ? -1.0 : 1.0;  // sign(0) = +1
            return {a, -norm1(z)};
        }
        case SetKind::ball: {
            double nz = norm2(z);
            if (nz == 0.0) return {zeros(static_cast<int>(z.size())), 0.0};
            return {(-1.0 / nz) * z, -nz};
        }
    }
    throw std::logic_error("best_action: unknown set kind");
}

namespace {

class FixedAdversary final : public Adversary {
public:
    explicit FixedAdversary(Vec z) : z_(std::move(z)) {}
    Vec next(long, const Vec&, RngStream&) override { return z_; }
    bool oblivious() const override { return true; }
    Vec expected_z(long) const override { return z_; }
    std::string name() const override { return "fixed"; }

private:
    Vec z_;
};

class IidL1VertexAdversary final : public Adversary {
public:
    explicit IidL1VertexAdversary(int d) : d_(d) {}
    Vec next(long, const Vec&, RngStream& rng) override {
        int i = rng.uniform_int(d_);
        return basis_vector(d_, i, rng.sign() > 0 ? 1.0 : -1.0);
    }
    bool oblivious() const override { return true; }
    Vec expected_z(long) const override { return zeros(d_); }
    std::string name() const override { return "iid_l1_vertex"; }

private:
    int d_;
};

class IidSphereAdversary final : public Adversary {
public:
    explicit IidSphereAdversary(int d) : d_(d) {}
    Vec next(long, const Vec&, RngStream& rng) override {
        Vec z(static_cast<size_t>(d_));
        double n;
        do {
            for (double& v : z) v = rng.gaussian();
            n = norm2(z);
        } while (n < 1e-12);
        return (1.0 / n) * z;
    }
    bool oblivious() const override { return true; }
    Vec expected_z(long) const override { return zeros(d_); }
    std::string name() const override { return "iid_sphere"; }

private:
    int d_;
};

class RotatingAdversary final : public Adversary {
public:
    RotatingAdversary(int d, double omega) : d_(d), omega_(omega) {
        if (d < 2) throw std::invalid_argument("rotating adversary needs d >= 2");
    }
    Vec next(long t, const Vec&, RngStream&) override { return expected_z(t); }
    bool oblivious() const override { return true; }
    Vec expected_z(long t) const override {
        Vec z = zeros(d_);
        z[0] = std::cos(omega_ * static_cast<double>(t));
        z[1] = std::sin(omega_ * static_cast<double>(t));
        return z;
    }
    std::string name() const override { return "rotating"; }

private:
    int d_;
    double omega_;
};

class SequenceAdversary final : public Adversary {
public:
    explicit SequenceAdversary(std::vector<Vec> rows) : rows_(std::move(rows)) {}
    Vec next(long t, const Vec&, RngStream&) override { return expected_z(t); }
    bool oblivious() const override { return true; }
    Vec expected_z(long t) const override {
        if (t < 1 || static_cast<size_t>(t) > rows_.size())
            throw SequenceExhausted("loss sequence has " + std::to_string(rows_.size()) + " rows, round " + std::to_string(t) + " requested");
        return rows_[static_cast<size_t>(t - 1)];
    }
    std::string name() const override { return "sequence_file"; }

private:
    std::vector<Vec> rows_;
};

class AdaptiveWorstAdversary final : public Adversary {
public:
    explicit AdaptiveWorstAdversary(SetKind kind) : kind_(kind) {}
    Vec next(long, const Vec& prev, RngStream&) override {
        const int d = static_cast<int>(prev.size());
        switch (kind_) {
            case SetKind::hypercube: {
                // L1-ball vertex maximizing prev . z: +-e_j on the largest coordinate.
                int j = 0;
                for (int i = 1; i < d; ++i)
                    if (std::abs(prev[static_cast<size_t>(i)]) > std::abs(prev[static_cast<size_t>(j)])) j = i;
                double s = prev[static_cast<size_t>(j)] >= 0.0 ? 1.0 : -1.0;
                return basis_vector(d, j, s);
            }
            case SetKind::ball: {
                double n = norm2(prev);
                if (n < 1e-12) return basis_vector(d, 0, 1.0);
                return (1.0 / n) * prev;
            }
            case SetKind::finite:
                // Raw direction of the previous play; the environment scales
                // it into the induced dual set.
                if (norm2(prev) < 1e-12) return basis_vector(d, 0, 1.0);
                return prev;
        }
        throw std::logic_error("adaptive adversary: unknown set kind");
    }
    bool oblivious() const override { return false; }
    Vec expected_z(long) const override { throw std::logic_error("adaptive adversary has no precommitted sequence"); }
    std::string name() const override { return "adaptive_worst"; }

private:
    SetKind kind_;
};

}  // namespace

std::shared_ptr<Adversary> make_fixed_adversary(Vec z) { return std::make_shared<FixedAdversary>(std::move(z)); }
std::shared_ptr<Adversary> make_iid_l1_vertex_adversary(int d) { return std::make_shared<IidL1VertexAdversary>(d); }
std::shared_ptr<Adversary> make_iid_sphere_adversary(int d) { return std::make_shared<IidSphereAdversary>(d); }
std::shared_ptr<Adversary> make_rotating_adversary(int d, double omega) { return std::make_shared<RotatingAdversary>(d, omega); }
std::shared_ptr<Adversary> make_sequence_adversary(std::vector<Vec> rows) { return std::make_shared<SequenceAdversary>(std::move(rows)); }
std::shared_ptr<Adversary> make_adaptive_worst_adversary(SetKind kind) { return std::make_shared<AdaptiveWorstAdversary>(kind); }

Environment::Environment(ActionSet set, std::shared_ptr<Adversary> adversary)
    : set_(std::move(set)), adversary_(std::move(adversary)) {
    if (set_.kind == SetKind::finite) pre_ = preprocess(set_.points);
}

void Environment::validate_member(const Vec& z) const {
    const double tol = 1e-9;
    switch (set_.kind) {
        case SetKind::hypercube:
            if (norm1(z) > 1.0 + tol) throw RangeViolation("loss vector outside the L1 ball");
            return;
        case SetKind::ball:
            if (norm2(z) > 1.0 + tol) throw RangeViolation("loss vector outside the L2 ball");
            return;
        case SetKind::finite:
            for (size_t i = 0; i < set_.points.size(); ++i) {
                if (std::abs(dot(set_.points[i], z)) > 1.0 + tol)
                    throw RangeViolation("loss vector outside the induced dual set");
                if (std::abs(pre_->reduced_loss(static_cast<int>(i), z)) > 1.0 + tol)
                    throw RangeViolation("loss vector outside the centered induced dual set");
            }
            return;
    }
}

Vec Environment::draw_loss(long t, const Vec& prev_played, RngStream& rng) {
    Vec z = adversary_->next(t, prev_played, rng);
    if (set_.kind == SetKind::finite) {
        // Generators are made feasible by scaling; precommitted sequences
        // must already be members and are rejected otherwise.
        double worst = 0.0;
        for (size_t i = 0; i < set_.points.size(); ++i) {
            worst = std::max(worst, std::abs(dot(set_.points[i], z)));
            worst = std::max(worst, std::abs(pre_->reduced_loss(static_cast<int>(i), z)));
        }
        if (worst > 1.0) {
            if (adversary_->name() == "sequence_file" || adversary_->name() == "fixed") {
                if (worst > 1.0 + 1e-9) throw RangeViolation("loss vector outside the induced dual set");
            } else {
                z = (1.0 / worst) * z;
            }
        }
    }
    validate_member(z);
    return z;
}

Vec Environment::expected_cumulative_z(long n) const {
    Vec sum = zeros(set_.dim);
    for (long t = 1; t <= n; ++t) add_scaled(sum, 1.0, adversary_->expected_z(t));
    return sum;
}

std::vector<RoundRecord> run_trajectory(Policy& policy, Environment& env, long n, RngStream& rng,
                                        std::vector<Vec>* losses_out) {
    if (policy.dim() != env.set().dim) throw std::invalid_argument("run_trajectory: policy/environment dimension mismatch");
    std::vector<RoundRecord> records;
    records.reserve(static_cast<size_t>(n));
    Vec prev_played = zeros(env.set().dim);
    for (long t = 1; t <= n; ++t) {
        Vec z = env.draw_loss(t, prev_played, rng);
        if (losses_out) losses_out->push_back(z);
        RoundRecord rec;
        rec.t = t;
        rec.played = policy.play(rng);
        rec.realized_loss = dot(rec.played, z);
        if (std::abs(rec.realized_loss) > 1.0 + 1e-9)
            throw RangeViolation("run_trajectory: realized loss left the dual range");
        policy.observe(dot(policy.loss_query_point(), z));
        rec.estimate = policy.last_estimate();
        rec.internal_action = policy.internal_action();
        rec.exploration = policy.last_was_exploration();
        rec.cert_term = policy.certificate_round_term(z);
        prev_played = rec.played;
        records.push_back(std::move(rec));
    }
    return records;
}

double theorem_bound(BoundKind kind, long n, int d, long num_actions) {
    const double nn = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    switch (kind) {
        case BoundKind::exp2_john:
            return 2.0 * std::sqrt(3.0 * nn * dd * std::log(static_cast<double>(num_actions)));
        case BoundKind::hypercube:
            return 2.0 * dd * std::sqrt(3.0 * nn * std::log(2.0));
        case BoundKind::ball:
            return 3.0 * std::sqrt(dd * nn * std::log(nn));
    }
    throw std::logic_error("theorem_bound: unknown kind");
}

RegretReport regret_report(const std::vector<std::vector<RoundRecord>>& per_seed_records,
                           const std::vector<std::vector<Vec>>& per_seed_losses,
                           const std::vector<double>& per_seed_certificates,
                           const Environment& env, BoundKind bound, long n, long num_actions) {
    if (per_seed_records.empty()) throw std::invalid_argument("regret_report: need at least one seed");

    RegretReport rep;
    rep.regret_is_realized = !env.adversary().oblivious();
    rep.bound_value = theorem_bound(bound, n, env.set().dim, num_actions);

    Vec expected_sum;
    if (!rep.regret_is_realized) {
        expected_sum = env.expected_cumulative_z(n);
        BestAction best = best_action(env.set(), expected_sum);
        rep.best_fixed_action = best.action;
        rep.best_fixed_value = best.value;
    }

    for (size_t s = 0; s < per_seed_records.size(); ++s) {
        double cum = 0.0;
        for (const RoundRecord& r : per_seed_records[s]) cum += r.realized_loss;
        rep.per_seed_cum_loss.push_back(cum);

        double best_val;
        if (rep.regret_is_realized) {
            Vec zsum = zeros(env.set().dim);
            for (const Vec& z : per_seed_losses[s]) add_scaled(zsum, 1.0, z);
            BestAction best = best_action(env.set(), zsum);
            best_val = best.value;
            if (s == 0) {
                rep.best_fixed_action = best.action;
                rep.best_fixed_value = best.value;
            }
        } else {
            best_val = rep.best_fixed_value;
        }
        rep.per_seed_pseudo_regret.push_back(cum - best_val);
    }

    const double k = static_cast<double>(rep.per_seed_pseudo_regret.size());
    double mean = 0.0;
    for (double r : rep.per_seed_pseudo_regret) mean += r;
    mean /= k;
    double var = 0.0;
    for (double r : rep.per_seed_pseudo_regret) var += (r - mean) * (r - mean);
    var = k > 1 ? var / (k - 1.0) : 0.0;
    rep.mean_pseudo_regret = mean;
    rep.stderr_pseudo_regret = std::sqrt(var / k);

    double cert = 0.0;
    for (double c : per_seed_certificates) cert += c;
    rep.certificate_value = per_seed_certificates.empty() ? 0.0 : cert / static_cast<double>(per_seed_certificates.size());
    return rep;
}

}  // namespace banlin
