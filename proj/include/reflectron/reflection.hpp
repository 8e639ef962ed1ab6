#pragma once

#include <complex>
#include <cstdint>

#include "reflectron/clip_network.hpp"
#include "reflectron/cost_ledger.hpp"
#include "reflectron/quantum_state.hpp"
#include "reflectron/szegedy.hpp"

namespace reflectron {

/* Exact rank-one reflection vs. the phase-estimation circuit. */
enum class ReflectionMode { ideal, approximate };

/* Failed try: re-prepare from scratch, or project and keep the register. */
enum class RetryMode { fresh, recycle };

/* Default constant c in the check cap T = ceil(c / sqrt(eps)). */
inline constexpr double kCheckCapConstant = 0.78539816339744831;  // pi/4

/**
 * @brief Tuning of one quantum deliberation.
 *
 * s ancilla qubits per estimation round, k rounds, check_cap T (the pair
 * count per try is drawn uniformly from {0, ..., T}), retry_cap tries in
 * total. adaptive_schedule ignores check_cap and doubles the cap per
 * failed try (the unknown-mass regime).
 */
struct QuantumParams {
    int s = 1;
    int k = 1;
    std::uint64_t check_cap = 1;
    int retry_cap = 8;
    ReflectionMode reflection_mode = ReflectionMode::approximate;
    RetryMode retry_mode = RetryMode::fresh;
    double t_constant = kCheckCapConstant;
    bool adaptive_schedule = false;

    void validate() const;  // throws DimensionMismatch on a bad field
};

/**
 * @brief Derive deliberation tuning from the walk's phase gap and the
 * flagged stationary mass eps.
 *
 *   s = max(1, ceil(log2(1 / phase_gap)) + 2)
 *   k = cfg.k1 + ceil(log2(1 / sqrt(eps)))
 *   T = max(1, ceil(t_constant / sqrt(eps)))
 *
 * The additive bump on k compensates the reflection error accumulated
 * over the up-to-T pairs of a try. retry_cap copies cfg.k3.
 *
 * @throws NonErgodic        on a nonpositive phase gap.
 * @throws ZeroFlagMass      on nonpositive eps.
 * @throws DimensionMismatch on eps > 1 or a bad config.
 */
QuantumParams derive_quantum_params(double phase_gap, double eps, const AgentConfig& cfg,
                                    double t_constant = kCheckCapConstant);

/**
 * @brief Controlled walk/walk-inverse applications inside one approximate
 * reflection: k * 2 * (2^s - 1) estimation powers for s >= 2, or 4k for
 * the single-ancilla rounds. Always <= k * 2^{s+1}; each application
 * books 4 quantum diffusion calls.
 */
std::uint64_t aro_walk_calls(int k, int s);

/**
 * @brief Approximate reflection about the stationary pair state.
 *
 * k rounds write phase information into their s-qubit registers
 * (for s >= 2: Hadamards, controlled powers of the walk, inverse Fourier
 * transform; for s = 1: a fixed-angle controlled-walk interleave whose
 * round kernel is cos^2(phi/2)), one sign flip hits every component with
 * a nonzero ancilla, and the rounds run backwards. Books
 * 4 * aro_walk_calls(k, s) quantum diffusion calls plus one invocation.
 *
 * On the walk span the result R satisfies, for s at its derived value:
 *   - R |pi_pair>|0...0> = |pi_pair>|0...0> exactly;
 *   - ||(R + 1) |psi>|0...0>|| <= 2^{1-k} for span |psi> orthogonal to
 *     the stationary pair state, ancillas included in the norm.
 *
 * @throws AncillaNotClean   if more than 0.3 of the state's norm sits
 *         outside the all-zero ancilla block on entry.
 * @throws DimensionMismatch if the state's ancilla layout is not (k, s).
 */
void approximate_reflection(const WalkSpec& spec, const QuantumParams& params,
                            QuantumState& state, CostLedger* ledger = nullptr);

/**
 * @brief Amplitude left on the all-zero ancilla register by one
 * s-qubit estimation round on a walk eigenvector of phase phi:
 * (1/2^s) * sum_x e^{i phi x}.
 */
std::complex<double> pe_round_kernel(int s, double phi);

/**
 * @brief Same for the single-ancilla round: ((1 + e^{i phi}) / 2)^2,
 * computed from the actual rotation-interleave matrix.
 */
std::complex<double> gqsp_round_kernel(double phi);

}  // namespace reflectron
