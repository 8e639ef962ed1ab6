#include "reflectron/szegedy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "reflectron/errors.hpp"
#include "reflectron/markov.hpp"
#include "reflectron/tolerances.hpp"

namespace reflectron {

namespace {

/*
 * The diffusion unitaries are block-diagonal: one n-dimensional block per
 * value of the untouched register. Each block is the Householder
 * reflection through (sqrt-column + e_0), which exchanges |0> with the
 * square-root of the block's probability column and is a real symmetric
 * involution. That choice of unitary completion is arbitrary but
 * harmless: the walk only ever applies the blocks to vectors inside the
 * defined subspace.
 */
Eigen::MatrixXd householder_block(const double* column, std::size_t n) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x)
        u[static_cast<Eigen::Index>(x)] = std::sqrt(std::max(column[x], 0.0));
    const double nrm = u.norm();
    if (!(nrm > 0.0)) throw NumericalFailure("diffusion block: zero probability column");
    u /= nrm;

    Eigen::VectorXd w = u;
    w[0] -= 1.0;
    const double ww = w.squaredNorm();
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(n));
    if (ww > 1e-28) B.noalias() -= (2.0 / ww) * (w * w.transpose());
    return B;
}

std::vector<Eigen::MatrixXd> diffusion_blocks(const StochasticMatrix& P) {
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(P.n());
    for (std::size_t i = 0; i < P.n(); ++i) blocks.push_back(householder_block(P.column(i), P.n()));
    return blocks;
}

/* y_j' = sum_j B_i(j', j) x_j within each (ancilla, first-register) slice. */
void apply_blocks_to_second(const std::vector<Eigen::MatrixXd>& blocks, QuantumState& state) {
    const std::size_t n = state.n;
    std::vector<std::complex<double>> tmp(n);
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a)
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double>* x = state.amp.data() + state.index(a, i, 0);
            const Eigen::MatrixXd& B = blocks[i];
            for (std::size_t jp = 0; jp < n; ++jp) {
                std::complex<double> acc = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    acc += B(static_cast<Eigen::Index>(jp), static_cast<Eigen::Index>(j)) * x[j];
                tmp[jp] = acc;
            }
            std::copy(tmp.begin(), tmp.end(), x);
        }
}

/* Same on the first register (stride-n gathers) with per-j blocks. */
void apply_blocks_to_first(const std::vector<Eigen::MatrixXd>& blocks, QuantumState& state) {
    const std::size_t n = state.n;
    std::vector<std::complex<double>> tmp(n);
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a) {
        const std::size_t base = a * n * n;
        for (std::size_t j = 0; j < n; ++j) {
            const Eigen::MatrixXd& C = blocks[j];
            for (std::size_t ip = 0; ip < n; ++ip) {
                std::complex<double> acc = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    acc += C(static_cast<Eigen::Index>(ip), static_cast<Eigen::Index>(i)) *
                           state.amp[base + i * n + j];
                tmp[ip] = acc;
            }
            for (std::size_t ip = 0; ip < n; ++ip) state.amp[base + ip * n + j] = tmp[ip];
        }
    }
}

void flip_second_off_zero(QuantumState& state) {
    const std::size_t n = state.n;
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a)
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double>* row = state.amp.data() + state.index(a, i, 0);
            for (std::size_t j = 1; j < n; ++j) row[j] = -row[j];
        }
}

void flip_first_off_zero(QuantumState& state) {
    const std::size_t n = state.n;
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a)
        for (std::size_t i = 1; i < n; ++i) {
            std::complex<double>* row = state.amp.data() + state.index(a, i, 0);
            for (std::size_t j = 0; j < n; ++j) row[j] = -row[j];
        }
}

void check_system_shape(const QuantumState& state, std::size_t n, const char* where) {
    if (state.n != n) throw DimensionMismatch(std::string(where) + ": register size mismatch");
}

}  // namespace

WalkSpec make_walk_spec(const StochasticMatrix& P) {
    WalkSpec spec;
    spec.P = P;
    const SpectralInfo info = spectral_info(P);
    spec.pi = info.stationary;
    if (!is_reversible(P, spec.pi))
        throw NotReversible("make_walk_spec: chain breaks detailed balance");
    spec.P_star = time_reversal(P, spec.pi);
    spec.delta = info.gap;
    const double lam2 = std::clamp(1.0 - info.gap, 0.0, 1.0);
    spec.phase_gap = 2.0 * std::acos(lam2);
    // Holds analytically (arccos(1-d) >= sqrt(2d)); a violation means the
    // spectral pipeline handed back garbage.
    if (spec.phase_gap < 2.0 * std::sqrt(spec.delta) - 1e-9)
        throw NumericalFailure("make_walk_spec: phase gap fell below 2*sqrt(gap)");
    return spec;
}

void apply_diffusion_U(const StochasticMatrix& P, QuantumState& state, CostLedger* ledger) {
    check_system_shape(state, P.n(), "apply_diffusion_U");
    apply_blocks_to_second(diffusion_blocks(P), state);
    if (ledger) ledger->quantum_diffusion_calls += 1;
}

void apply_diffusion_V(const StochasticMatrix& P_star, QuantumState& state, CostLedger* ledger) {
    check_system_shape(state, P_star.n(), "apply_diffusion_V");
    apply_blocks_to_first(diffusion_blocks(P_star), state);
    if (ledger) ledger->quantum_diffusion_calls += 1;
}

void swap_registers(QuantumState& state) {
    const std::size_t n = state.n;
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a) {
        const std::size_t base = a * n * n;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                std::swap(state.amp[base + i * n + j], state.amp[base + j * n + i]);
    }
}

void apply_walk(const WalkSpec& spec, QuantumState& state, CostLedger* ledger) {
    apply_diffusion_U(spec.P, state, ledger);
    flip_second_off_zero(state);
    apply_diffusion_U(spec.P, state, ledger);
    apply_diffusion_V(spec.P_star, state, ledger);
    flip_first_off_zero(state);
    apply_diffusion_V(spec.P_star, state, ledger);
}

void apply_walk_inverse(const WalkSpec& spec, QuantumState& state, CostLedger* ledger) {
    apply_diffusion_V(spec.P_star, state, ledger);
    flip_first_off_zero(state);
    apply_diffusion_V(spec.P_star, state, ledger);
    apply_diffusion_U(spec.P, state, ledger);
    flip_second_off_zero(state);
    apply_diffusion_U(spec.P, state, ledger);
}

std::vector<double> walk_matrix_rowmajor(const WalkSpec& spec) {
    const std::size_t n = spec.P.n();
    const auto d = static_cast<Eigen::Index>(n * n);
    const auto Ub = diffusion_blocks(spec.P);
    const auto Vb = diffusion_blocks(spec.P_star);

    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd D2(d), D1(d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto x = static_cast<Eigen::Index>(i * n + j);
            D2[x] = (j == 0) ? 1.0 : -1.0;
            D1[x] = (i == 0) ? 1.0 : -1.0;
            for (std::size_t y = 0; y < n; ++y) {
                U(x, static_cast<Eigen::Index>(i * n + y)) =
                    Ub[i](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(y));
                V(x, static_cast<Eigen::Index>(y * n + j)) =
                    Vb[j](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y));
            }
        }

    const Eigen::MatrixXd W = (V * D1.asDiagonal() * V) * (U * D2.asDiagonal() * U);
    std::vector<double> out(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c)
            out[static_cast<std::size_t>(r) * n * n + static_cast<std::size_t>(c)] = W(r, c);
    return out;
}

std::vector<std::vector<double>> walk_span_basis(const WalkSpec& spec) {
    const std::size_t n = spec.P.n();
    const auto d = static_cast<Eigen::Index>(n * n);

    std::vector<Eigen::VectorXd> candidates;
    candidates.reserve(2 * n + 1);
    {
        const auto pi_pair = pi_init_amplitudes(spec);
        Eigen::VectorXd v(d);
        for (std::size_t x = 0; x < n * n; ++x) v[static_cast<Eigen::Index>(x)] = pi_pair[x];
        candidates.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
        for (std::size_t j = 0; j < n; ++j)
            v[static_cast<Eigen::Index>(i * n + j)] = std::sqrt(std::max(spec.P.p(j, i), 0.0));
        candidates.push_back(std::move(v));
    }
    for (std::size_t j = 0; j < n; ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
        for (std::size_t i = 0; i < n; ++i)
            v[static_cast<Eigen::Index>(i * n + j)] = std::sqrt(std::max(spec.P_star.p(i, j), 0.0));
        candidates.push_back(std::move(v));
    }

    // Modified Gram-Schmidt, two sweeps per vector for orthogonality at
    // machine precision. The 1e-7 cut drops the dependent directions; the
    // smallest genuine residual is ~sqrt(2*delta), far above it for any
    // gap this project works with.
    std::vector<Eigen::VectorXd> basis;
    for (auto& c : candidates) {
        Eigen::VectorXd r = c;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) r -= b.dot(r) * b;
        const double nrm = r.norm();
        if (nrm > 1e-7) basis.push_back(r / nrm);
    }

    std::vector<std::vector<double>> out;
    out.reserve(basis.size());
    for (const auto& b : basis)
        out.emplace_back(b.data(), b.data() + b.size());
    return out;
}

std::vector<double> walk_eigenphases_on_span(const WalkSpec& spec) {
    const std::size_t n = spec.P.n();
    const auto d = static_cast<Eigen::Index>(n * n);
    const auto basis = walk_span_basis(spec);
    const auto r = static_cast<Eigen::Index>(basis.size());

    Eigen::MatrixXd Q(d, r);
    for (Eigen::Index c = 0; c < r; ++c)
        for (Eigen::Index x = 0; x < d; ++x)
            Q(x, c) = basis[static_cast<std::size_t>(c)][static_cast<std::size_t>(x)];

    const auto wr = walk_matrix_rowmajor(spec);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        wr.data(), d, d);

    const Eigen::MatrixXd WQ = W * Q;
    const Eigen::MatrixXd M = Q.transpose() * WQ;
    const double escaped = (WQ - Q * M).cwiseAbs().maxCoeff();
    if (escaped > tol().span_confinement)
        throw NumericalFailure("walk_eigenphases_on_span: walk leaks out of its span");

    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("walk_eigenphases_on_span: eigensolver failed");

    std::vector<double> phases;
    phases.reserve(static_cast<std::size_t>(r));
    for (Eigen::Index m = 0; m < r; ++m) {
        const std::complex<double> lam = es.eigenvalues()[m];
        if (std::abs(std::abs(lam) - 1.0) > 1e-9)
            throw NumericalFailure("walk_eigenphases_on_span: non-unimodular eigenvalue");
        phases.push_back(std::arg(lam));
    }
    std::sort(phases.begin(), phases.end());
    return phases;
}

double phase_gap_from_span(const WalkSpec& spec) {
    double best = -1.0;
    for (double phi : walk_eigenphases_on_span(spec)) {
        const double mag = std::abs(phi);
        if (mag > 1e-7 && (best < 0.0 || mag < best)) best = mag;
    }
    // Only the 1-node chain has no rotating sector at all; pi matches the
    // 2*arccos(0) convention its WalkSpec reports.
    return best < 0.0 ? std::acos(-1.0) : best;
}

void check_reflection(const std::vector<std::size_t>& flagged, QuantumState& state,
                      CostLedger* ledger) {
    const std::size_t n = state.n;
    std::vector<char> flip(n, 0);
    for (std::size_t i : flagged) {
        if (i >= n) throw DimensionMismatch("check_reflection: node out of range");
        flip[i] = 1;
    }
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a)
        for (std::size_t i = 0; i < n; ++i) {
            if (!flip[i]) continue;
            std::complex<double>* row = state.amp.data() + state.index(a, i, 0);
            for (std::size_t j = 0; j < n; ++j) row[j] = -row[j];
        }
    if (ledger) ledger->quantum_check_reflections += 1;
}

void ideal_reflection(const std::vector<double>& pi_system, QuantumState& state) {
    if (pi_system.size() != state.system_dim())
        throw DimensionMismatch("ideal_reflection: axis vector is not n^2 long");
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a) {
        const std::size_t base = a * state.system_dim();
        std::complex<double> overlap = 0.0;
        for (std::size_t x = 0; x < pi_system.size(); ++x)
            overlap += pi_system[x] * state.amp[base + x];
        overlap *= 2.0;
        for (std::size_t x = 0; x < pi_system.size(); ++x)
            state.amp[base + x] = overlap * pi_system[x] - state.amp[base + x];
    }
}

void ideal_reflection(const WalkSpec& spec, QuantumState& state) {
    ideal_reflection(pi_init_amplitudes(spec), state);
}

std::vector<double> pi_init_amplitudes(const WalkSpec& spec) {
    const std::size_t n = spec.P.n();
    std::vector<double> a(n * n);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = std::sqrt(std::max(spec.pi[i] * spec.P.p(j, i), 0.0));
            a[i * n + j] = v;
            norm2 += v * v;
        }
    if (!(norm2 > 0.0)) throw NumericalFailure("pi_init_amplitudes: zero stationary mass");
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& v : a) v *= scale;
    return a;
}

std::vector<double> tailed_state_amplitudes(const WalkSpec& spec,
                                            const std::vector<std::size_t>& nodes) {
    const std::size_t n = spec.P.n();
    if (nodes.empty()) throw DimensionMismatch("tailed_state_amplitudes: empty node set");
    std::vector<char> keep(n, 0);
    for (std::size_t i : nodes) {
        if (i >= n) throw DimensionMismatch("tailed_state_amplitudes: node out of range");
        keep[i] = 1;
    }
    std::vector<double> a(n * n, 0.0);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = std::sqrt(std::max(spec.pi[i] * spec.P.p(j, i), 0.0));
            a[i * n + j] = v;
            norm2 += v * v;
        }
    }
    if (!(norm2 > 1e-300)) throw ZeroFlagMass("tailed_state_amplitudes: node set has no mass");
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& v : a) v *= scale;
    return a;
}

QuantumState prepare_initial_state(const WalkSpec& spec, int k, int s, CostLedger* ledger) {
    const auto real_amp = pi_init_amplitudes(spec);
    std::vector<std::complex<double>> sys(real_amp.begin(), real_amp.end());
    QuantumState state = with_clean_ancillas(spec.P.n(), k, s, sys);
    if (ledger) {
        ledger->state_preparations += 1;
        ledger->quantum_diffusion_calls += 1;
    }
    return state;
}

QuantumState prepare_initial_state_by_double_diffusion(const WalkSpec& spec, int k, int s,
                                                       CostLedger* ledger) {
    QuantumState state = basis_state(spec.P.n(), k, s, 0, 0);
    apply_diffusion_U(spec.P, state, ledger);
    swap_registers(state);
    apply_diffusion_U(spec.P, state, ledger);
    if (ledger) ledger->state_preparations += 1;
    return state;
}

}  // namespace reflectron
