#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reflectron/classical_agents.hpp"
#include "reflectron/quantum_agent.hpp"

namespace reflectron {

/* FNV-1a over the canonical config text; embedded in output headers so a
   file can be traced back to the exact configuration that produced it. */
std::uint64_t fnv1a64(std::string_view text);

/* Worker count for trial sharding: the REFLECTRON_THREADS environment
   variable if set (minimum 1), otherwise 1. Results are independent of
   the worker count by construction (per-trial derived seeds, integer
   partial sums). */
unsigned bench_threads();

/**
 * @brief One ensemble entry for the scaling experiment.
 *
 * The chain is built over the half-dyadic stationary law
 * pi_i ~ 2^{-(i+1)} (last point doubled so the masses sum to one) with
 * the requested spectral gap, which makes every dyadic flag fraction
 * down to 2^{-(n-1)} exactly reachable by greedy top-mass flagging.
 */
struct EnsemblePoint {
    std::size_t n = 2;
    double target_gap = 0.0;     // 0 keeps the construction's natural gap
    double flag_fraction = 0.5;  // target flagged stationary mass
};

/** @brief Mean per-deliberation costs of both agents on one chain. */
struct ScalingRecord {
    std::string chain_id;
    std::size_t n = 0;
    double eps = 0.0;    // measured flagged stationary mass
    double delta = 0.0;  // measured spectral gap
    double classical_diffusions = 0.0;  // means over trials
    double quantum_diffusion_calls = 0.0;
    double classical_checks = 0.0;
    double quantum_check_reflections = 0.0;
    std::uint64_t trials = 0;
};

/* Greedy top-mass flag choice: walk the actions in decreasing stationary
   mass, adding any whose inclusion keeps the flagged mass <= 1.2 * target,
   until it reaches 0.8 * target.
   @throws DegenerateData if no subset lands within the +-20% window. */
ActionSet flags_for_fraction(const Distribution& pi, double target);

/**
 * @brief Run both deliberators over an ensemble with matched flags.
 *
 * Per ensemble point the classical deliberator and the span-engine
 * quantum deliberator (fresh retries, the given cost pricing) each run
 * `trials` deliberations; ledger means are recorded. Trials use seeds
 * derived from (seed, point index, trial index) and may be sharded
 * across bench_threads() workers; the result is byte-identical for any
 * worker count. A deliberation that exhausts its retry cap still counts:
 * its ledger (flushed before the throw) is the cost of the capped run.
 */
std::vector<ScalingRecord> scaling_experiment(const std::vector<EnsemblePoint>& ensemble,
                                              std::uint64_t trials, const AgentConfig& cfg,
                                              std::uint64_t seed,
                                              ReflectionMode pricing = ReflectionMode::approximate,
                                              double t_constant = kCheckCapConstant);

/**
 * @brief Empirical output laws of both agents vs the exact tailed
 * distribution and each other.
 *
 * tv_* are variational distances of the empirical action frequencies,
 * conditioned on deliberations that finished within the retry cap (the
 * capped_* counters report the rest). sigma_* are one-sigma binomial
 * radii for the corresponding TV estimate,
 * 0.5 * sqrt(sum_i p_i (1 - p_i) / N) with p the exact tailed law.
 */
struct BehaviorResult {
    double tv_classical = 0.0;
    double tv_quantum = 0.0;
    double tv_between = 0.0;
    double sigma_classical = 0.0;
    double sigma_quantum = 0.0;
    std::uint64_t trials_classical = 0;
    std::uint64_t trials_quantum = 0;
    std::uint64_t capped_classical = 0;
    std::uint64_t capped_quantum = 0;
};

/* The quantum side runs the full state-vector circuit (not the span
   engine) in the given reflection mode. */
BehaviorResult behavior_experiment(const StochasticMatrix& P, const ActionSet& flagged,
                                   std::uint64_t trials, const AgentConfig& cfg,
                                   std::uint64_t seed,
                                   ReflectionMode mode = ReflectionMode::ideal,
                                   RetryMode retry = RetryMode::fresh);

/** @brief Least-squares line through (log x, log y). */
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/* @throws DegenerateData on fewer than 3 points, a nonpositive value, a
   size mismatch, or zero variance in log x. */
FitResult fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys);

/**
 * @brief The scaling-law fits the speedup claim rests on.
 *
 * Cost means regressed against their predicted growth variables:
 * classical diffusions vs 1/(eps*delta), quantum diffusion calls vs
 * 1/sqrt(eps*delta), classical checks vs 1/eps, quantum check
 * reflections vs 1/sqrt(eps), and the classical/quantum diffusion ratio
 * vs 1/sqrt(eps*delta). Slope 1 everywhere is the quadratic-speedup
 * prediction.
 */
struct ScalingFits {
    FitResult classical_diffusions;
    FitResult quantum_diffusions;
    FitResult classical_checks;
    FitResult quantum_checks;
    FitResult speedup_ratio;
};

ScalingFits fit_scaling(const std::vector<ScalingRecord>& records);

/* CSV: "# config_hash=<hex>" then a documented header row, one record
   per line. Stable field formatting (max_digits10) so identical inputs
   produce identical bytes. */
std::string scaling_to_csv(const std::vector<ScalingRecord>& records, std::uint64_t config_hash);

/* JSON object with the five fits and the config hash. */
std::string scaling_fits_to_json(const ScalingFits& fits, std::uint64_t config_hash);

}  // namespace reflectron
