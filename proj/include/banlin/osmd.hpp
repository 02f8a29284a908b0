#pragma once

#include <memory>
#include <vector>

#include "banlin/linalg.hpp"

// Online stochastic mirror descent in follow-the-regularized-leader form:
// the iterate is a_{t+1} = grad F*(-eta * sum_{s<=t} estimate_s), so no
// explicit Bregman projection is ever needed — both regularizers below map
// all of R^d into their domain.

namespace banlin {

class Regularizer {
public:
    virtual ~Regularizer() = default;

    virtual int dim() const = 0;
    virtual double value(const Vec& x) const = 0;       // F, +inf outside the domain
    virtual Vec grad(const Vec& x) const = 0;           // defined on the open domain
    virtual double dual_value(const Vec& u) const = 0;  // F*, closed form
    virtual Vec dual_grad(const Vec& u) const = 0;      // maps R^d into the domain
    virtual Vec min_point() const = 0;                  // argmin F
    virtual double range_sup() const = 0;               // sup F over the comparator set minus F(min_point)
    virtual bool in_domain_closure(const Vec& x, double tol) const = 0;
};

struct OsmdState {
    std::shared_ptr<const Regularizer> reg;
    Vec cum_estimate;    // sum of loss estimates so far
    double eta = 0.0;
    Vec current_action;  // = dual_grad(-eta * cum_estimate)
    long round = 1;
};

OsmdState osmd_init(std::shared_ptr<const Regularizer> reg, double eta);

// Folds one loss estimate into the state; raises DomainEscape if the dual
// gradient leaves the domain closure by more than 1e-9.
void osmd_step(OsmdState& state, const Vec& estimate);

// D_{F*}(u, v) = F*(u) - F*(v) - (u - v) . grad F*(v), nonnegative.
double bregman_dual(const Regularizer& reg, const Vec& u, const Vec& v);

// Per-round terms recorded during a run, combined into the right-hand side
// of the mirror-descent regret inequality:
//   comparator_slack + range_sup/eta + (1/eta) sum bregman + sum bias.
struct CertificateTrace {
    std::vector<double> bregman_terms;
    std::vector<double> bias_terms;
    double comparator_slack = 0.0;
};

double regret_certificate(const CertificateTrace& trace, double f_range, double eta);

}  // namespace banlin
