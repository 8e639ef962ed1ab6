#pragma once

#include <cstdint>
#include <random>

#include "reflectron/clip_network.hpp"
#include "reflectron/cost_ledger.hpp"
#include "reflectron/markov.hpp"
#include "reflectron/stochastic_matrix.hpp"

namespace reflectron {

/**
 * @brief Classical reflecting deliberator over one fixed chain.
 *
 * Precomputes the spectral data, the mixing time t_mix for precision
 * e^{-k1}, and the t_mix-step kernel P^{t_mix}, so each loop iteration is
 * a single column lookup. The loop:
 *
 *   start at a uniformly random state; repeat { diffuse t_mix steps;
 *   sample a state (one check); stop if flagged } up to ceil(64/eps)
 *   iterations, where eps is the flagged stationary mass.
 *
 * Each iteration books t_mix classical diffusions and 1 classical check.
 * The emitted action is within 2 e^{-k1} / eps of the tailed stationary
 * distribution in variational distance.
 */
class ClassicalDeliberator {
public:
    ClassicalDeliberator(StochasticMatrix P, const AgentConfig& cfg);

    /* Budget <= 0 means unbounded. With a positive budget the loop aborts
       once the deliberation's own ledger passes it (the caller's impatience
       cutoff); the returned outcome is marked timed out. */
    DeliberationOutcome deliberate(const ActionSet& flagged, std::mt19937_64& rng,
                                   CostLedger* ledger = nullptr,
                                   std::uint64_t op_budget = 0) const;

    std::uint64_t t_mix() const { return t_mix_; }
    const Distribution& stationary() const { return info_.stationary; }
    const SpectralInfo& spectral() const { return info_; }

private:
    StochasticMatrix P_;
    SpectralInfo info_;
    std::uint64_t t_mix_ = 0;
    StochasticMatrix kernel_;  // P^{t_mix}
};

/**
 * @brief One-shot reflecting deliberation (builds the deliberator, runs once).
 *
 * @throws NonErgodic / NotReversible on an unsuitable chain.
 * @throws ZeroFlagMass if the flagged set carries no stationary mass.
 * @throws RetryCapExceeded past ceil(64/eps) loop iterations.
 */
DeliberationOutcome classical_rps_deliberate(const StochasticMatrix& P_s,
                                             const ActionSet& flagged, const AgentConfig& cfg,
                                             std::mt19937_64& rng,
                                             CostLedger* ledger = nullptr);

/**
 * @brief The standard hopping agent with flags.
 *
 * Hops from the percept clip along its normalized h-row (one classical
 * diffusion); the first action clip hit is checked (one classical check)
 * and emitted if flagged, otherwise the walk restarts from the percept.
 * Retry cap ceil(64/eps) with eps the flagged hopping mass. Budget
 * semantics match ClassicalDeliberator::deliberate.
 *
 * @throws RetryCapExceeded / DanglingClip / ZeroFlagMass as applicable.
 */
DeliberationOutcome standard_ps_deliberate(const ClipNetwork& net, std::size_t percept,
                                           const FlagSet& flags, std::mt19937_64& rng,
                                           CostLedger* ledger = nullptr,
                                           std::uint64_t op_budget = 0);

}  // namespace reflectron
