#include "reflectron/quantum_agent.hpp"

#include <algorithm>
#include <cmath>

#include "reflectron/errors.hpp"
#include "reflectron/markov.hpp"
#include "reflectron/rng.hpp"

namespace reflectron {

namespace {

ActionSet canonical_flags(const ActionSet& flagged, std::size_t n, const char* who) {
    if (flagged.empty()) throw DimensionMismatch(std::string(who) + ": empty flag set");
    ActionSet sorted = flagged;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.back() >= n)
        throw DimensionMismatch(std::string(who) + ": flagged index out of range");
    return sorted;
}

double mass_of(const ActionSet& sorted, const Distribution& pi, const char* who) {
    double eps = 0.0;
    for (std::size_t a : sorted) eps += pi[a];
    if (!(eps > 0.0))
        throw ZeroFlagMass(std::string(who) + ": flagged set carries no stationary mass");
    return std::min(eps, 1.0);
}

bool over_budget(const CostLedger& led, std::uint64_t budget) {
    return budget != 0 && primitive_ops(led) > budget;
}

std::uint64_t try_cap(const QuantumParams& params, bool adaptive, int attempt) {
    if (!adaptive) return params.check_cap;
    return std::uint64_t{1} << std::min(attempt - 1, 62);
}

[[noreturn]] void throw_retry_cap(int cap) {
    throw RetryCapExceeded("quantum_rps_deliberate: no flagged outcome after " +
                           std::to_string(cap) + " tries");
}

}  // namespace

QuantumDeliberator::QuantumDeliberator(const StochasticMatrix& P, const AgentConfig& cfg,
                                       ReflectionMode mode, RetryMode retry, double t_constant,
                                       bool adaptive_schedule)
    : cfg_(cfg), mode_(mode), retry_(retry), t_constant_(t_constant),
      adaptive_(adaptive_schedule) {
    cfg_.validate();
    spec_ = make_walk_spec(P);
}

double QuantumDeliberator::flagged_mass(const ActionSet& flagged) const {
    const ActionSet sorted = canonical_flags(flagged, spec_.P.n(), "quantum_rps_deliberate");
    return mass_of(sorted, spec_.pi, "quantum_rps_deliberate");
}

QuantumParams QuantumDeliberator::params_for(const ActionSet& flagged) const {
    QuantumParams params =
        derive_quantum_params(spec_.phase_gap, flagged_mass(flagged), cfg_, t_constant_);
    params.reflection_mode = mode_;
    params.retry_mode = retry_;
    params.adaptive_schedule = adaptive_;
    return params;
}

const std::vector<double>& QuantumDeliberator::marginal_for(const ActionSet& flagged,
                                                            std::uint64_t t,
                                                            const QuantumParams& params) const {
    const auto key = std::make_pair(flagged, t);
    if (auto it = marginal_cache_.find(key); it != marginal_cache_.end()) return it->second;

    QuantumState state = (mode_ == ReflectionMode::ideal)
                             ? prepare_initial_state(spec_, 0, 0)
                             : prepare_initial_state(spec_, params.k, params.s);
    for (std::uint64_t p = 0; p < t; ++p) {
        check_reflection(flagged, state);
        if (mode_ == ReflectionMode::ideal)
            ideal_reflection(spec_, state);
        else
            approximate_reflection(spec_, params, state);
    }
    return marginal_cache_.emplace(key, first_register_marginal(state)).first->second;
}

DeliberationOutcome QuantumDeliberator::run_fresh(const ActionSet& flagged,
                                                  const QuantumParams& params,
                                                  std::mt19937_64& rng, CostLedger* ledger,
                                                  std::uint64_t op_budget) const {
    DeliberationOutcome out;
    out.action = kNoAction;
    const auto flush = [&] {
        if (ledger) *ledger += out.ledger;
    };

    for (int attempt = 1; attempt <= params.retry_cap; ++attempt) {
        const std::uint64_t t = uniform_index(rng, try_cap(params, adaptive_, attempt) + 1);

        out.ledger.state_preparations += 1;
        out.ledger.quantum_diffusion_calls += 1;
        if (over_budget(out.ledger, op_budget)) {
            flush();
            return out;
        }
        for (std::uint64_t p = 0; p < t; ++p) {
            out.ledger.quantum_check_reflections += 1;
            if (mode_ == ReflectionMode::approximate) {
                out.ledger.aro_invocations += 1;
                out.ledger.quantum_diffusion_calls += 4 * aro_walk_calls(params.k, params.s);
            }
            if (over_budget(out.ledger, op_budget)) {
                flush();
                return out;
            }
        }

        const std::size_t i = sample_weights(rng, marginal_for(flagged, t, params));
        out.ledger.measurements += 1;
        out.samples_drawn += 1;
        if (over_budget(out.ledger, op_budget)) {
            flush();
            return out;
        }
        if (std::binary_search(flagged.begin(), flagged.end(), i)) {
            out.action = i;
            flush();
            return out;
        }
    }
    flush();
    throw_retry_cap(params.retry_cap);
}

DeliberationOutcome QuantumDeliberator::run_recycle(const ActionSet& flagged,
                                                    const QuantumParams& params,
                                                    std::mt19937_64& rng, CostLedger* ledger,
                                                    std::uint64_t op_budget) const {
    DeliberationOutcome out;
    out.action = kNoAction;
    const auto flush = [&] {
        if (ledger) *ledger += out.ledger;
    };

    QuantumState state = (mode_ == ReflectionMode::ideal)
                             ? prepare_initial_state(spec_, 0, 0, &out.ledger)
                             : prepare_initial_state(spec_, params.k, params.s, &out.ledger);
    if (over_budget(out.ledger, op_budget)) {
        flush();
        return out;
    }

    for (int attempt = 1; attempt <= params.retry_cap; ++attempt) {
        const std::uint64_t t = uniform_index(rng, try_cap(params, adaptive_, attempt) + 1);
        for (std::uint64_t p = 0; p < t; ++p) {
            check_reflection(flagged, state, &out.ledger);
            if (mode_ == ReflectionMode::ideal)
                ideal_reflection(spec_, state);
            else
                approximate_reflection(spec_, params, state, &out.ledger);
            if (over_budget(out.ledger, op_budget)) {
                flush();
                return out;
            }
        }

        PovmOutcome povm = povm_flag_projection(state, flagged, rng, &out.ledger);
        out.samples_drawn += 1;
        if (over_budget(out.ledger, op_budget)) {
            flush();
            return out;
        }
        if (povm.flagged_branch) {
            const std::size_t i = measure_first_register(povm.post, rng, &out.ledger);
            if (over_budget(out.ledger, op_budget)) {
                flush();
                return out;
            }
            out.action = i;
            flush();
            return out;
        }
        state = std::move(povm.post);
    }
    flush();
    throw_retry_cap(params.retry_cap);
}

DeliberationOutcome QuantumDeliberator::deliberate(const ActionSet& flagged,
                                                   std::mt19937_64& rng, CostLedger* ledger,
                                                   std::uint64_t op_budget) const {
    const ActionSet sorted = canonical_flags(flagged, spec_.P.n(), "quantum_rps_deliberate");
    QuantumParams params = params_for(sorted);
    return retry_ == RetryMode::fresh ? run_fresh(sorted, params, rng, ledger, op_budget)
                                      : run_recycle(sorted, params, rng, ledger, op_budget);
}

SpanDeliberator::SpanDeliberator(const StochasticMatrix& P, const AgentConfig& cfg,
                                 ReflectionMode pricing, RetryMode retry, double t_constant,
                                 bool adaptive_schedule)
    : cfg_(cfg), pricing_(pricing), retry_(retry), t_constant_(t_constant),
      adaptive_(adaptive_schedule) {
    cfg_.validate();
    const SpectralInfo info = spectral_info(P);
    if (!is_reversible(P, info.stationary))
        throw NotReversible("SpanDeliberator: chain breaks detailed balance");
    pi_ = info.stationary;
    delta_ = info.gap;
    phase_gap_ = 2.0 * std::acos(std::clamp(1.0 - info.gap, 0.0, 1.0));
}

double SpanDeliberator::flagged_mass(const ActionSet& flagged) const {
    const ActionSet sorted = canonical_flags(flagged, pi_.size(), "quantum_rps_deliberate");
    return mass_of(sorted, pi_, "quantum_rps_deliberate");
}

QuantumParams SpanDeliberator::params_for(const ActionSet& flagged) const {
    QuantumParams params =
        derive_quantum_params(phase_gap_, flagged_mass(flagged), cfg_, t_constant_);
    params.reflection_mode = pricing_;
    params.retry_mode = retry_;
    params.adaptive_schedule = adaptive_;
    return params;
}

DeliberationOutcome SpanDeliberator::deliberate(const ActionSet& flagged, std::mt19937_64& rng,
                                                CostLedger* ledger,
                                                std::uint64_t op_budget) const {
    const std::size_t n = pi_.size();
    const ActionSet sorted = canonical_flags(flagged, n, "quantum_rps_deliberate");
    const double eps = mass_of(sorted, pi_, "quantum_rps_deliberate");
    const QuantumParams params = params_for(sorted);
    const double theta = std::asin(std::min(1.0, std::sqrt(eps)));

    std::vector<double> tailed(n, 0.0), complement(n, 0.0);
    for (std::size_t a : sorted) tailed[a] = pi_[a] / eps;
    const double rest = 1.0 - eps;
    if (rest > 1e-14) {
        std::size_t at = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (at < sorted.size() && sorted[at] == i)
                ++at;
            else
                complement[i] = pi_[i] / rest;
        }
    }

    DeliberationOutcome out;
    out.action = kNoAction;
    const auto flush = [&] {
        if (ledger) *ledger += out.ledger;
    };
    const auto charge_pair = [&] {
        out.ledger.quantum_check_reflections += 1;
        if (pricing_ == ReflectionMode::approximate) {
            out.ledger.aro_invocations += 1;
            out.ledger.quantum_diffusion_calls += 4 * aro_walk_calls(params.k, params.s);
        }
    };
    const auto charge_prep = [&] {
        out.ledger.state_preparations += 1;
        out.ledger.quantum_diffusion_calls += 1;
    };

    if (retry_ == RetryMode::recycle) {
        charge_prep();
        if (over_budget(out.ledger, op_budget)) {
            flush();
            return out;
        }
    }

    for (int attempt = 1; attempt <= params.retry_cap; ++attempt) {
        const std::uint64_t t = uniform_index(rng, try_cap(params, adaptive_, attempt) + 1);

        if (retry_ == RetryMode::fresh) {
            charge_prep();
            if (over_budget(out.ledger, op_budget)) {
                flush();
                return out;
            }
        }
        for (std::uint64_t p = 0; p < t; ++p) {
            charge_pair();
            if (over_budget(out.ledger, op_budget)) {
                flush();
                return out;
            }
        }

        // After t pairs the in-plane angle from the unflagged axis is
        // (2t+1)*theta from a fresh start, 2t*theta when continuing from
        // the projected (unflagged) register.
        const double angle = (retry_ == RetryMode::recycle && attempt > 1)
                                 ? 2.0 * static_cast<double>(t) * theta
                                 : (2.0 * static_cast<double>(t) + 1.0) * theta;
        const double sin_angle = std::sin(angle);
        const double p_flag = std::min(1.0, sin_angle * sin_angle);

        if (retry_ == RetryMode::fresh) {
            std::vector<double> marginal(n);
            for (std::size_t i = 0; i < n; ++i)
                marginal[i] = p_flag * tailed[i] + (1.0 - p_flag) * complement[i];
            const std::size_t i = sample_weights(rng, marginal);
            out.ledger.measurements += 1;
            out.samples_drawn += 1;
            if (over_budget(out.ledger, op_budget)) {
                flush();
                return out;
            }
            if (std::binary_search(sorted.begin(), sorted.end(), i)) {
                out.action = i;
                flush();
                return out;
            }
        } else {
            const bool branch = uniform01(rng) < p_flag;
            const double p_branch = branch ? p_flag : 1.0 - p_flag;
            if (p_branch < 1e-14)
                throw DegenerateBranch("quantum_rps_deliberate: sampled branch has no mass");
            out.ledger.measurements += 1;
            out.samples_drawn += 1;
            if (over_budget(out.ledger, op_budget)) {
                flush();
                return out;
            }
            if (branch) {
                const std::size_t i = sample_weights(rng, tailed);
                out.ledger.measurements += 1;
                if (over_budget(out.ledger, op_budget)) {
                    flush();
                    return out;
                }
                out.action = i;
                flush();
                return out;
            }
            // Unflagged projection: the register is now the unflagged
            // axis itself; the next try rotates up from angle zero.
        }
    }
    flush();
    throw_retry_cap(params.retry_cap);
}

DeliberationOutcome quantum_rps_deliberate(const StochasticMatrix& P_s, const ActionSet& flagged,
                                           const AgentConfig& cfg, std::mt19937_64& rng,
                                           CostLedger* ledger, ReflectionMode mode,
                                           RetryMode retry) {
    QuantumDeliberator deliberator(P_s, cfg, mode, retry);
    return deliberator.deliberate(flagged, rng, ledger);
}

}  // namespace reflectron
