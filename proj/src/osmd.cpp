#include "banlin/osmd.hpp"

#include <stdexcept>

#include "banlin/errors.hpp"

namespace banlin {

OsmdState osmd_init(std::shared_ptr<const Regularizer> reg, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("osmd_init: eta must be positive");
    OsmdState s;
    s.cum_estimate = zeros(reg->dim());
    s.eta = eta;
    s.current_action = reg->min_point();
    s.round = 1;
    s.reg = std::move(reg);
    return s;
}

void osmd_step(OsmdState& state, const Vec& estimate) {
    add_scaled(state.cum_estimate, 1.0, estimate);
    Vec next = state.reg->dual_grad(-state.eta * state.cum_estimate);
    if (!state.reg->in_domain_closure(next, 1e-9))
        throw DomainEscape("osmd_step: dual gradient left the domain closure");
    state.current_action = std::move(next);
    state.round += 1;
}

double bregman_dual(const Regularizer& reg, const Vec& u, const Vec& v) {
    return reg.dual_value(u) - reg.dual_value(v) - dot(u - v, reg.dual_grad(v));
}

double regret_certificate(const CertificateTrace& trace, double f_range, double eta) {
    double bregman_sum = 0.0;
    for (double b : trace.bregman_terms) bregman_sum += b;
    double bias_sum = 0.0;
    for (double b : trace.bias_terms) bias_sum += b;
    return trace.comparator_slack + f_range / eta + bregman_sum / eta + bias_sum;
}

}  // namespace banlin
