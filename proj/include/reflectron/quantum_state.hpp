#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "reflectron/cost_ledger.hpp"

namespace reflectron {

/**
 * @brief Dense two-register state with k ancilla registers of s qubits each.
 *
 * The system is a pair of n-level registers (first register index i, second
 * register index j); on top sit k*s ancilla qubits grouped into k registers
 * of s qubits. The amplitude of |a>|i>|j> lives at
 *
 *     amp[a * n * n + i * n + j]
 *
 * where a in [0, 2^{k s}) is the joint ancilla index and ancilla register r
 * occupies bits [r*s, (r+1)*s) of a, least significant register first.
 *
 * A valid state has unit norm within Tolerances::state_norm. Operators
 * mutate states in place; states are exclusively owned during application.
 */
struct QuantumState {
    std::size_t n = 0;  // node count per system register
    int k = 0;          // ancilla register count
    int s = 0;          // qubits per ancilla register
    std::vector<std::complex<double>> amp;

    std::size_t system_dim() const { return n * n; }
    std::size_t ancilla_dim() const { return std::size_t{1} << (k * s); }
    std::size_t dim() const { return system_dim() * ancilla_dim(); }

    std::size_t index(std::size_t a, std::size_t i, std::size_t j) const {
        return a * n * n + i * n + j;
    }
};

/* All-zero amplitudes (not normalized; a scratch buffer with valid shape). */
QuantumState make_state(std::size_t n, int k, int s);

/* Computational basis state |0...0>|i>|j>. */
QuantumState basis_state(std::size_t n, int k, int s, std::size_t i, std::size_t j);

/*
 * Embed a length-n^2 system vector (layout i*n + j) into ancilla block 0,
 * all ancillas in |0...0>.
 */
QuantumState with_clean_ancillas(std::size_t n, int k, int s,
                                 const std::vector<std::complex<double>>& system);

double squared_norm(const QuantumState& state);

/* @throws NumericalFailure if | ||state|| - 1 | exceeds Tolerances::state_norm. */
void require_normalized(const QuantumState& state, const char* where);

/* @throws DimensionMismatch on shape disagreement. */
std::complex<double> inner_product(const QuantumState& a, const QuantumState& b);

/* |<a|b>|, shape-checked. */
double fidelity(const QuantumState& a, const QuantumState& b);

/* Born weights of the first register: w[i] = sum_{a,j} |amp(a,i,j)|^2. */
std::vector<double> first_register_marginal(const QuantumState& state);

/* Probability mass currently outside ancilla block 0. */
double ancilla_dirt(const QuantumState& state);

/**
 * @brief Sample the first register (Born rule); the state is not collapsed.
 *
 * Counts one measurement in the ledger when one is supplied.
 */
std::size_t measure_first_register(const QuantumState& state, std::mt19937_64& rng,
                                   CostLedger* ledger = nullptr);

/** @brief Result of the flagged/unflagged generalized measurement. */
struct PovmOutcome {
    bool flagged_branch = false;
    QuantumState post;  // renormalized post-measurement state
};

/**
 * @brief Two-outcome measurement {P_f, 1 - P_f} of the first register,
 * where P_f projects onto the flagged node set.
 *
 * Samples the branch with Born probabilities and returns the renormalized
 * projected state. Counts one measurement when a ledger is supplied.
 *
 * @throws DegenerateBranch if the sampled branch has probability < 1e-14.
 */
PovmOutcome povm_flag_projection(const QuantumState& state,
                                 const std::vector<std::size_t>& flagged,
                                 std::mt19937_64& rng, CostLedger* ledger = nullptr);

/*
 * Binary state format: header of n, k, s as unsigned 32-bit little-endian,
 * then dim() interleaved little-endian float64 (re, im) pairs. The sidecar
 * at path + ".json" records the generating chain's hash and the rng seed.
 */
void write_state(const std::string& path, const QuantumState& state);
QuantumState read_state(const std::string& path);

struct StateMeta {
    std::string chain_hash;
    std::uint64_t seed = 0;
};

void write_state_sidecar(const std::string& path, const StateMeta& meta);
StateMeta read_state_sidecar(const std::string& path);

}  // namespace reflectron
