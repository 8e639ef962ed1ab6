#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "reflectron/clip_network.hpp"
#include "reflectron/cost_ledger.hpp"
#include "reflectron/reflection.hpp"
#include "reflectron/szegedy.hpp"

namespace reflectron {

/*
 * Both deliberators below run the same loop:
 *
 *   prepare the stationary pair state; draw t uniformly from {0..T};
 *   apply t (check reflection, reflection-about-stationary) pairs;
 *   measure the first register; emit if flagged, else retry, at most
 *   cfg.k3 tries.
 *
 * Per-try rng contract (fresh retries): one uniform_index draw for t,
 * then exactly one uniform01 for the measurement. A failed fresh try is
 * re-prepared from scratch; a recycling retry instead performs the
 * two-outcome flagged/unflagged measurement and continues from the
 * projected register (the unflagged projection of a span state is the
 * normalized unflagged component, so the next try rotates up from there).
 *
 * Budget <= 0 means unbounded; with a positive budget the loop aborts as
 * soon as the deliberation's own ledger passes it and the outcome carries
 * kNoAction, mirroring ClassicalDeliberator.
 */

/**
 * @brief Full state-vector deliberator.
 *
 * Reflections are either the exact rank-one reflection (ideal; uncounted,
 * the error-free oracle) or the ancilla circuit (approximate; priced at
 * 4 * aro_walk_calls(k, s) diffusion calls per application).
 *
 * Fresh-retry outcomes are sampled from memoized per-t first-register
 * marginals: with fresh retries the circuit for a given t is fixed, so
 * one simulation per (flag set, t) suffices and the ledger is charged by
 * the same per-step formulas the live circuit books. Recycling mode
 * simulates every try honestly on the live register.
 */
class QuantumDeliberator {
public:
    QuantumDeliberator(const StochasticMatrix& P, const AgentConfig& cfg,
                       ReflectionMode mode = ReflectionMode::approximate,
                       RetryMode retry = RetryMode::fresh,
                       double t_constant = kCheckCapConstant,
                       bool adaptive_schedule = false);

    DeliberationOutcome deliberate(const ActionSet& flagged, std::mt19937_64& rng,
                                   CostLedger* ledger = nullptr,
                                   std::uint64_t op_budget = 0) const;

    const WalkSpec& walk() const { return spec_; }
    ReflectionMode mode() const { return mode_; }
    RetryMode retry() const { return retry_; }

    /* Flagged stationary mass eps of a (validated) flag set. */
    double flagged_mass(const ActionSet& flagged) const;

    /* The tuning a deliberation over this flag set runs with. */
    QuantumParams params_for(const ActionSet& flagged) const;

private:
    WalkSpec spec_;
    AgentConfig cfg_;
    ReflectionMode mode_;
    RetryMode retry_;
    double t_constant_;
    bool adaptive_;

    mutable std::map<std::pair<ActionSet, std::uint64_t>, std::vector<double>> marginal_cache_;

    const std::vector<double>& marginal_for(const ActionSet& flagged, std::uint64_t t,
                                            const QuantumParams& params) const;
    DeliberationOutcome run_fresh(const ActionSet& flagged, const QuantumParams& params,
                                  std::mt19937_64& rng, CostLedger* ledger,
                                  std::uint64_t op_budget) const;
    DeliberationOutcome run_recycle(const ActionSet& flagged, const QuantumParams& params,
                                    std::mt19937_64& rng, CostLedger* ledger,
                                    std::uint64_t op_budget) const;
};

/**
 * @brief Two-dimensional invariant-plane deliberator.
 *
 * With exact reflections and the exact initial state, the register never
 * leaves the plane spanned by the tailed state and its complement, so the
 * loop reduces to angle arithmetic: after t pairs the flagged probability
 * is sin^2((2t+1) * theta) with sin(theta) = sqrt(eps), and conditioned
 * on a flagged outcome the emitted action follows the tailed distribution
 * exactly. Outcomes therefore match the ideal state-vector deliberator
 * draw for draw (same rng consumption), at any register size.
 *
 * The ledger is priced per `pricing`: `approximate` books what the
 * ancilla circuit would cost (the honest price of the scalable agent,
 * used by the cost experiments), `ideal` books what the ideal-oracle
 * state-vector run books (used for cross-checks against it).
 */
class SpanDeliberator {
public:
    SpanDeliberator(const StochasticMatrix& P, const AgentConfig& cfg,
                    ReflectionMode pricing = ReflectionMode::approximate,
                    RetryMode retry = RetryMode::fresh,
                    double t_constant = kCheckCapConstant,
                    bool adaptive_schedule = false);

    DeliberationOutcome deliberate(const ActionSet& flagged, std::mt19937_64& rng,
                                   CostLedger* ledger = nullptr,
                                   std::uint64_t op_budget = 0) const;

    const Distribution& stationary() const { return pi_; }
    double spectral_gap() const { return delta_; }
    double phase_gap() const { return phase_gap_; }

    double flagged_mass(const ActionSet& flagged) const;
    QuantumParams params_for(const ActionSet& flagged) const;

private:
    Distribution pi_;
    double delta_ = 0.0;
    double phase_gap_ = 0.0;
    AgentConfig cfg_;
    ReflectionMode pricing_;
    RetryMode retry_;
    double t_constant_;
    bool adaptive_;
};

/**
 * @brief One-shot quantum reflecting deliberation (builds the state-vector
 * deliberator, sorts the flag set, runs once).
 *
 * @throws NonErgodic / NotReversible on an unsuitable chain.
 * @throws ZeroFlagMass if the flagged set carries no stationary mass.
 * @throws RetryCapExceeded past cfg.k3 tries.
 */
DeliberationOutcome quantum_rps_deliberate(const StochasticMatrix& P_s, const ActionSet& flagged,
                                           const AgentConfig& cfg, std::mt19937_64& rng,
                                           CostLedger* ledger = nullptr,
                                           ReflectionMode mode = ReflectionMode::approximate,
                                           RetryMode retry = RetryMode::fresh);

}  // namespace reflectron
