#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "reflectron/cost_ledger.hpp"
#include "reflectron/distribution.hpp"
#include "reflectron/stochastic_matrix.hpp"

namespace reflectron {

/**
 * @brief Spectral summary of an ergodic chain.
 *
 * Eigenvalues are sorted by decreasing modulus (ties: decreasing real part,
 * then decreasing imaginary part). For a valid chain the leading eigenvalue
 * is 1 within Tolerances::leading_eigenvalue and the spectral gap is
 *
 *     delta = 1 - |lambda_2|.
 */
struct SpectralInfo {
    std::vector<std::complex<double>> eigenvalues;
    double gap = 0.0;
    Distribution stationary;
};

/**
 * @brief Unique stationary distribution pi with P pi = pi.
 *
 * Dense eigendecomposition for n <= 64; power iteration (cap 10^6 sweeps)
 * above that. The result satisfies ||P pi - pi||_1 <= 1e-10.
 *
 * @throws NonErgodic      if the chain is reducible or periodic.
 * @throws NoConvergence   if the iterative path stalls above tolerance.
 * @throws NumericalFailure if the dense eigensolver fails.
 */
Distribution stationary_distribution(const StochasticMatrix& P);

/** @brief Full spectrum, gap and stationary vector in one pass (dense). */
SpectralInfo spectral_info(const StochasticMatrix& P);

/**
 * @brief Detailed-balance test: pi_i P(j|i) == pi_j P(i|j) for all pairs,
 * within Tolerances::reversibility.
 */
bool is_reversible(const StochasticMatrix& P, const Distribution& pi);

/**
 * @brief Time-reversed chain P*.
 *
 * Defined through pi_i P(j|i) = pi_j P*(i|j); P is reversible iff P* == P.
 * @throws ZeroStationaryMass if some pi_j is ~0.
 */
StochasticMatrix time_reversal(const StochasticMatrix& P, const Distribution& pi);

/**
 * @brief t diffusion steps: P^t * pi0.
 *
 * Records t classical diffusion operations in the caller's ledger when one
 * is supplied.
 */
Distribution mix(const StochasticMatrix& P, const Distribution& pi0, std::uint64_t t,
                 CostLedger* ledger = nullptr);

/**
 * @brief Steps sufficient to mix within eps' of stationarity:
 *
 *     t = ceil( (max_i ln(1/pi_i) + ln(1/eps')) / delta ).
 *
 * Natural logarithms; 0 < eps' <= 1 (the bound is 0 at eps' = 1 when pi is
 * a point mass, i.e. the chain needs no steps to be within distance 1).
 */
std::uint64_t mixing_time_upper_bound(const StochasticMatrix& P, double eps_prime);

/** Same bound computed from precomputed spectral data (hot paths). */
std::uint64_t mixing_time_upper_bound(const SpectralInfo& info, double eps_prime);

/**
 * @brief P^t by repeated squaring (columns re-normalized against drift).
 *
 * The product of column-stochastic matrices is column-stochastic, so this
 * is the t-step transition kernel. Used to turn the "diffuse t_mix steps"
 * loop into a single cached column lookup per sample.
 */
StochasticMatrix chain_power(const StochasticMatrix& P, std::uint64_t t);

/**
 * @brief Seeded random reversible ergodic chain on n >= 2 states.
 *
 * Construction: random symmetric positive weights give a reversible base
 * walk; a half-lazy step makes the spectrum nonnegative; the gap is then
 * steered exactly by convex mixing either toward the identity (to shrink
 * the gap) or toward the rank-1 chain on the stationary vector (to widen
 * it). Deterministic per seed.
 *
 * @param target_gap  optional; achieved within 10% relative when > 0.
 * @throws GapUnreachable if target_gap is outside (0, 1].
 */
StochasticMatrix random_reversible_chain(std::size_t n, std::uint64_t seed,
                                         double target_gap = 0.0);

/**
 * @brief Reversible ergodic chain with a prescribed stationary vector and,
 * optionally, a prescribed spectral gap.
 *
 * Construction: Metropolis acceptance over a uniform complete-graph
 * proposal gives detailed balance with respect to pi; a half-lazy step
 * makes the spectrum nonnegative; convex mixing toward the identity or
 * toward the rank-1 chain on pi (both of which preserve pi) then places
 * |lambda_2| exactly at 1 - target_gap. Deterministic (no randomness).
 *
 * The benchmark ensembles lean on this: with a dyadic pi, flag subsets
 * realize any flagged mass down to the smallest component, while the gap
 * is dialed independently.
 *
 * @param target_gap  0 keeps the natural half-lazy gap; otherwise (0, 1].
 * @throws DimensionMismatch  if pi has a nonpositive entry or n < 2.
 * @throws GapUnreachable     if target_gap is outside (0, 1].
 */
StochasticMatrix reversible_chain_with_stationary(const Distribution& pi,
                                                  double target_gap = 0.0);

/**
 * @brief Lazy Metropolis chain on a ring of n >= 3 states with weights w.
 *
 * Proposal: stay put with probability 1/2, otherwise step to either ring
 * neighbour with probability 1/4 each; acceptance min(1, w_j / w_i) with
 * rejected mass staying put. The laziness keeps even-length rings with
 * uniform weights aperiodic. Reversible with stationary distribution
 * proportional to w by construction, and slow mixing (gap of order 1/n^2),
 * which is what the budgeted-deliberation experiments need.
 */
StochasticMatrix metropolis_ring_chain(const std::vector<double>& w);

}  // namespace reflectron
