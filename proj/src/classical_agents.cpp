#include "reflectron/classical_agents.hpp"

#include <algorithm>
#include <cmath>

#include "reflectron/errors.hpp"
#include "reflectron/rng.hpp"

namespace reflectron {

namespace {

void check_flagged(const ActionSet& flagged, std::size_t n, const char* who) {
    if (flagged.empty()) throw DimensionMismatch(std::string(who) + ": empty flag set");
    for (std::size_t a : flagged)
        if (a >= n) throw DimensionMismatch(std::string(who) + ": flagged index out of range");
}

std::uint64_t retry_cap(double eps) { return static_cast<std::uint64_t>(std::ceil(64.0 / eps)); }

}  // namespace

ClassicalDeliberator::ClassicalDeliberator(StochasticMatrix P, const AgentConfig& cfg)
    : P_(std::move(P)) {
    cfg.validate();
    info_ = spectral_info(P_);
    if (!is_reversible(P_, info_.stationary))
        throw NotReversible("ClassicalDeliberator: chain is not reversible");
    t_mix_ = mixing_time_upper_bound(info_, std::exp(-static_cast<double>(cfg.k1)));
    kernel_ = chain_power(P_, t_mix_);
}

DeliberationOutcome ClassicalDeliberator::deliberate(const ActionSet& flagged,
                                                     std::mt19937_64& rng, CostLedger* ledger,
                                                     std::uint64_t op_budget) const {
    const std::size_t n = P_.n();
    check_flagged(flagged, n, "classical_rps_deliberate");
    double eps = 0.0;
    for (std::size_t a : flagged) eps += info_.stationary[a];
    if (!(eps > 0.0))
        throw ZeroFlagMass("classical_rps_deliberate: flagged set carries no stationary mass");

    DeliberationOutcome out;
    out.action = kNoAction;
    const std::uint64_t cap = retry_cap(eps);
    std::size_t y = static_cast<std::size_t>(uniform_index(rng, n));
    for (std::uint64_t iter = 0; iter < cap; ++iter) {
        // Diffuse: t_mix steps, collapsed into one kernel-column lookup.
        out.ledger.classical_diffusions += t_mix_;
        if (op_budget != 0 && primitive_ops(out.ledger) > op_budget) {
            if (ledger) *ledger += out.ledger;
            return out;  // the caller gave up mid-diffusion
        }
        const double* col = kernel_.column(y);
        const double u = uniform01(rng);
        double acc = 0.0;
        y = n - 1;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            acc += col[j];
            if (u < acc) {
                y = j;
                break;
            }
        }
        // Check: one sample from the (approximately) stationary state.
        out.ledger.classical_checks += 1;
        out.samples_drawn += 1;
        if (op_budget != 0 && primitive_ops(out.ledger) > op_budget) {
            if (ledger) *ledger += out.ledger;
            return out;
        }
        if (std::binary_search(flagged.begin(), flagged.end(), y)) {
            out.action = y;
            if (ledger) *ledger += out.ledger;
            return out;
        }
    }
    if (ledger) *ledger += out.ledger;
    throw RetryCapExceeded("classical_rps_deliberate: no flagged sample after " +
                           std::to_string(cap) + " iterations");
}

DeliberationOutcome classical_rps_deliberate(const StochasticMatrix& P_s,
                                             const ActionSet& flagged, const AgentConfig& cfg,
                                             std::mt19937_64& rng, CostLedger* ledger) {
    ClassicalDeliberator deliberator(P_s, cfg);
    ActionSet sorted = flagged;
    std::sort(sorted.begin(), sorted.end());
    return deliberator.deliberate(sorted, rng, ledger);
}

DeliberationOutcome standard_ps_deliberate(const ClipNetwork& net, std::size_t percept,
                                           const FlagSet& flags, std::mt19937_64& rng,
                                           CostLedger* ledger, std::uint64_t op_budget) {
    if (flags.num_actions() != net.num_actions() || flags.num_percepts() != net.num_percepts())
        throw DimensionMismatch("standard_ps_deliberate: flag set shape mismatch");
    const std::vector<double>& row = net.percept_row(percept);
    double total = 0.0;
    for (double w : row) total += w;
    if (!(total > 0.0))
        throw DanglingClip("standard_ps_deliberate: percept has zero outgoing weight");

    const ActionSet& flagged = flags.set_for(percept);
    double eps = 0.0;
    for (std::size_t a : flagged) eps += row[a] / total;
    if (!(eps > 0.0))
        throw ZeroFlagMass("standard_ps_deliberate: flagged set carries no hopping mass");

    DeliberationOutcome out;
    out.action = kNoAction;
    const std::uint64_t cap = retry_cap(eps);
    for (std::uint64_t iter = 0; iter < cap; ++iter) {
        // One hop from the percept clip; the landing clip is an action.
        const std::size_t a = sample_weights(rng, row);
        out.ledger.classical_diffusions += 1;
        out.ledger.classical_checks += 1;
        out.samples_drawn += 1;
        if (op_budget != 0 && primitive_ops(out.ledger) > op_budget) {
            if (ledger) *ledger += out.ledger;
            return out;
        }
        if (std::binary_search(flagged.begin(), flagged.end(), a)) {
            out.action = a;
            if (ledger) *ledger += out.ledger;
            return out;
        }
    }
    if (ledger) *ledger += out.ledger;
    throw RetryCapExceeded("standard_ps_deliberate: no flagged action after " +
                           std::to_string(cap) + " hops");
}

}  // namespace reflectron
