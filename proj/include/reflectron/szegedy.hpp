#pragma once

#include <cstddef>
#include <vector>

#include "reflectron/cost_ledger.hpp"
#include "reflectron/distribution.hpp"
#include "reflectron/quantum_state.hpp"
#include "reflectron/stochastic_matrix.hpp"

namespace reflectron {

/**
 * @brief Everything the walk operator of a reversible chain is built from.
 *
 * P_star is the time reversal (numerically equal to P for reversible
 * chains; kept separate because the first-register diffusion is defined
 * through it). delta is the spectral gap 1 - |lambda_2|; phase_gap is the
 * minimum nonzero eigenphase of the walk operator on its invariant span,
 *
 *     phase_gap = 2 * arccos|lambda_2|,
 *
 * which satisfies cos(phase_gap / 2) = |lambda_2| and phase_gap >= 2*sqrt(delta).
 * A rank-one chain (|lambda_2| = 0) has phase_gap = pi.
 */
struct WalkSpec {
    StochasticMatrix P;
    StochasticMatrix P_star;
    Distribution pi;
    double delta = 0.0;
    double phase_gap = 0.0;
};

/**
 * @brief Validate and assemble the walk ingredients of a chain.
 *
 * @throws NonErgodic     if the chain is reducible or periodic.
 * @throws NotReversible  if detailed balance fails.
 */
WalkSpec make_walk_spec(const StochasticMatrix& P);

/**
 * @brief Second-register diffusion U: |i>|0> -> |i> sum_j sqrt(P(j|i)) |j>.
 *
 * Completed to a full unitary by the Householder reflection that exchanges
 * |0> with the square-root column (any completion works; the algorithm only
 * ever touches the defined subspace). Each block is a real symmetric
 * involution, so U is its own inverse. Applied per ancilla block.
 * Counts one quantum diffusion call.
 */
void apply_diffusion_U(const StochasticMatrix& P, QuantumState& state,
                       CostLedger* ledger = nullptr);

/**
 * @brief First-register diffusion V: |0>|j> -> sum_i sqrt(P*(i|j)) |i>|j>.
 *
 * Same construction as apply_diffusion_U on the other register, driven by
 * the time-reversed chain. For reversible chains V equals U conjugated by
 * the register swap. Counts one quantum diffusion call.
 */
void apply_diffusion_V(const StochasticMatrix& P_star, QuantumState& state,
                       CostLedger* ledger = nullptr);

/* Exchange the two system registers: |a>|i>|j> -> |a>|j>|i>. Free. */
void swap_registers(QuantumState& state);

/**
 * @brief One application of the walk operator W = ref(B) * ref(A), where
 * A = span{|i>|p_i>} and B = span{|p*_j>|j>}.
 *
 * Implemented as U (flip second register off |0>) U, then
 * V (flip first register off |0>) V; the four diffusion applications
 * count four quantum diffusion calls. Fixes the stationary pair state.
 */
void apply_walk(const WalkSpec& spec, QuantumState& state, CostLedger* ledger = nullptr);

/* Inverse walk, same price (both reflection factors are involutions). */
void apply_walk_inverse(const WalkSpec& spec, QuantumState& state,
                        CostLedger* ledger = nullptr);

/**
 * @brief Dense matrix of the walk operator on the n^2 system space.
 *
 * Row-major over pair indices x = i*n + j; real entries (all diffusion
 * blocks are real). Intended for spectral checks and for the controlled
 * powers inside the approximate reflection at desk scale.
 */
std::vector<double> walk_matrix_rowmajor(const WalkSpec& spec);

/**
 * @brief Orthonormal basis (real n^2 vectors) of the walk-invariant span
 * A + B; the stationary pair state is always basis vector 0.
 *
 * Dimension is 2n - 1 for an ergodic chain (A and B intersect exactly in
 * the stationary pair state).
 */
std::vector<std::vector<double>> walk_span_basis(const WalkSpec& spec);

/**
 * @brief Eigenphases of the walk operator restricted to its invariant
 * span, sorted ascending in (-pi, pi].
 *
 * Every phase is either ~0 (the stationary state) or +-2*theta with
 * cos(theta) = |lambda| for an eigenvalue lambda of P.
 *
 * @throws NumericalFailure if the span fails to be invariant within
 *         Tolerances::span_confinement.
 */
std::vector<double> walk_eigenphases_on_span(const WalkSpec& spec);

/**
 * @brief Minimum nonzero eigenphase magnitude from the dense span spectrum.
 *
 * Phases below 1e-7 in magnitude count as the fixed sector. Agrees with
 * WalkSpec::phase_gap within 1e-8 on ergodic reversible chains.
 */
double phase_gap_from_span(const WalkSpec& spec);

/**
 * @brief Sign flip on flagged first-register components:
 * |i>|j> -> -|i>|j> for i in flagged. Counts one check reflection.
 *
 * On the 2-D span of the tailed and stationary states, the negative of
 * this operator is exactly the reflection about the unflagged component.
 */
void check_reflection(const std::vector<std::size_t>& flagged, QuantumState& state,
                      CostLedger* ledger = nullptr);

/**
 * @brief Exact reflection 2|pi_pair><pi_pair| - 1 per ancilla block.
 *
 * Test oracle for the ideal deliberation regime; deliberately uncounted.
 */
void ideal_reflection(const WalkSpec& spec, QuantumState& state);
void ideal_reflection(const std::vector<double>& pi_system, QuantumState& state);

/**
 * @brief Amplitudes (real, unit norm, layout i*n + j) of the stationary
 * pair state sum_i sqrt(pi_i) |i>|p_i>.
 */
std::vector<double> pi_init_amplitudes(const WalkSpec& spec);

/**
 * @brief Stationary pair state restricted and renormalized to a node set:
 * sum_{i in S} sqrt(pi_i / eps) |i>|p_i> with eps the set's mass.
 *
 * @throws ZeroFlagMass on an empty or massless set.
 */
std::vector<double> tailed_state_amplitudes(const WalkSpec& spec,
                                            const std::vector<std::size_t>& nodes);

/**
 * @brief The deliberation loop's initial state sum_i sqrt(pi_i)|i>|p_i>
 * with k*s clean ancillas.
 *
 * The square-root stationary load is the preparation proper (pi is known
 * classically at desk scale); correlating the second register costs one
 * diffusion call. Counts one state preparation and one diffusion call.
 */
QuantumState prepare_initial_state(const WalkSpec& spec, int k, int s,
                                   CostLedger* ledger = nullptr);

/**
 * @brief Alternative preparation for rank-one chains: U on |0>|0>, swap,
 * U again. No classical knowledge of pi needed; two diffusion calls and
 * one state preparation. Agrees with prepare_initial_state within 1e-12
 * when the chain is rank-one.
 */
QuantumState prepare_initial_state_by_double_diffusion(const WalkSpec& spec, int k, int s,
                                                       CostLedger* ledger = nullptr);

}  // namespace reflectron
