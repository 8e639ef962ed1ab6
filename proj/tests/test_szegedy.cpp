#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "reflectron/clip_network.hpp"
#include "reflectron/errors.hpp"
#include "reflectron/markov.hpp"
#include "reflectron/quantum_state.hpp"
#include "reflectron/rng.hpp"
#include "reflectron/szegedy.hpp"
#include "reflectron/tolerances.hpp"

using namespace reflectron;

namespace {

constexpr double kPi = 3.14159265358979323846;

StochasticMatrix two_state_symmetric(double flip) {
    return StochasticMatrix::from_columns({{1.0 - flip, flip}, {flip, 1.0 - flip}});
}

QuantumState embed(const std::vector<double>& system, std::size_t n, int k, int s) {
    std::vector<std::complex<double>> amps(system.begin(), system.end());
    return with_clean_ancillas(n, k, s, amps);
}

double distance(const QuantumState& a, const QuantumState& b) {
    REQUIRE(a.amp.size() == b.amp.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.amp.size(); ++i) d2 += std::norm(a.amp[i] - b.amp[i]);
    return std::sqrt(d2);
}

QuantumState random_system_state(std::size_t n, int k, int s, std::mt19937_64& rng) {
    std::vector<std::complex<double>> v(n * n);
    double norm2 = 0.0;
    for (auto& a : v) {
        a = {uniform01(rng) - 0.5, uniform01(rng) - 0.5};
        norm2 += std::norm(a);
    }
    for (auto& a : v) a /= std::sqrt(norm2);
    return with_clean_ancillas(n, k, s, v);
}

}  // namespace

TEST_CASE("walk spec fields on the two-state closed form") {
    const WalkSpec spec = make_walk_spec(two_state_symmetric(0.25));
    CHECK(spec.pi.p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spec.delta == doctest::Approx(0.5).epsilon(1e-12));
    // Second eigenvalue 0.5: minimum nonzero walk eigenphase 2*arccos(0.5).
    CHECK(spec.phase_gap == doctest::Approx(2.0 * std::acos(0.5)).epsilon(1e-10));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(spec.P_star.p(i, j) == doctest::Approx(spec.P.p(i, j)).epsilon(1e-12));
}

TEST_CASE("walk spec rejects unsuitable chains") {
    const StochasticMatrix periodic = StochasticMatrix::from_columns({{0.0, 1.0}, {1.0, 0.0}});
    CHECK_THROWS_AS(make_walk_spec(periodic), NonErgodic);

    std::vector<std::vector<double>> cols(3, std::vector<double>(3, 0.0));
    for (std::size_t i = 0; i < 3; ++i) {
        cols[i][(i + 1) % 3] = 0.9;
        cols[i][(i + 2) % 3] = 0.1;
    }
    CHECK_THROWS_AS(make_walk_spec(StochasticMatrix::from_columns(cols)), NotReversible);
}

TEST_CASE("second-register diffusion on closed-form columns") {
    SUBCASE("uniform column loads an equal superposition") {
        const StochasticMatrix P = StochasticMatrix::uniform(2);
        QuantumState state = basis_state(2, 1, 1, 0, 0);
        CostLedger ledger;
        apply_diffusion_U(P, state, &ledger);
        const double r = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(state.amp[state.index(0, 0, 0)] - r) <= 1e-12);
        CHECK(std::abs(state.amp[state.index(0, 0, 1)] - r) <= 1e-12);
        CHECK(std::abs(state.amp[state.index(0, 1, 0)]) <= 1e-12);
        CHECK(std::abs(state.amp[state.index(0, 1, 1)]) <= 1e-12);
        CHECK(ledger.quantum_diffusion_calls == 1);
    }
    SUBCASE("deterministic column is a relabeling") {
        const StochasticMatrix P = StochasticMatrix::from_columns({{0.0, 1.0}, {1.0, 0.0}});
        QuantumState state = basis_state(2, 1, 1, 0, 0);
        apply_diffusion_U(P, state);
        CHECK(std::abs(state.amp[state.index(0, 0, 1)] - 1.0) <= 1e-12);
    }
    SUBCASE("the completion is an involution") {
        const StochasticMatrix P = random_reversible_chain(4, 8);
        std::mt19937_64 rng(5);
        const QuantumState original = random_system_state(4, 1, 1, rng);
        QuantumState state = original;
        apply_diffusion_U(P, state);
        apply_diffusion_U(P, state);
        CHECK(distance(state, original) <= 1e-12);
    }
}

TEST_CASE("first-register diffusion mirrors the second-register one") {
    SUBCASE("uniform chain superposes the first register") {
        const StochasticMatrix P = StochasticMatrix::uniform(2);
        QuantumState state = basis_state(2, 1, 1, 0, 0);
        apply_diffusion_V(P, state);
        const double r = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(state.amp[state.index(0, 0, 0)] - r) <= 1e-12);
        CHECK(std::abs(state.amp[state.index(0, 1, 0)] - r) <= 1e-12);
    }
    SUBCASE("on reversible chains V equals U conjugated by the register swap") {
        const WalkSpec spec = make_walk_spec(random_reversible_chain(5, 17));
        std::mt19937_64 rng(6);
        const QuantumState input = random_system_state(5, 1, 1, rng);

        QuantumState direct = input;
        apply_diffusion_V(spec.P_star, direct);

        QuantumState conjugated = input;
        swap_registers(conjugated);
        apply_diffusion_U(spec.P, conjugated);
        swap_registers(conjugated);

        CHECK(distance(direct, conjugated) <= 1e-12);
    }
    SUBCASE("V is an involution") {
        const StochasticMatrix P = random_reversible_chain(3, 2);
        std::mt19937_64 rng(9);
        const QuantumState original = random_system_state(3, 1, 1, rng);
        QuantumState state = original;
        apply_diffusion_V(P, state);
        apply_diffusion_V(P, state);
        CHECK(distance(state, original) <= 1e-12);
    }
}

TEST_CASE("register swap permutes pair indices") {
    QuantumState state = basis_state(3, 1, 1, 1, 2);
    swap_registers(state);
    CHECK(std::abs(state.amp[state.index(0, 2, 1)] - 1.0) <= 1e-15);
}

TEST_CASE("walk operator is orthogonal and fixes the stationary pair state") {
    const WalkSpec spec = make_walk_spec(random_reversible_chain(4, 33));
    const std::size_t d = 16;

    SUBCASE("dense matrix is orthogonal") {
        const std::vector<double> W = walk_matrix_rowmajor(spec);
        REQUIRE(W.size() == d * d);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                double dot = 0.0;
                for (std::size_t m = 0; m < d; ++m) dot += W[r * d + m] * W[c * d + m];
                CHECK(std::abs(dot - (r == c ? 1.0 : 0.0)) <= tol().unitarity);
            }
        }
    }
    SUBCASE("stationary pair state is a fixed point") {
        CostLedger ledger;
        QuantumState state = prepare_initial_state(spec, 1, 1, &ledger);
        const QuantumState reference = state;
        apply_walk(spec, state, &ledger);
        CHECK(distance(state, reference) <= 1e-9);
        CHECK(fidelity(state, reference) >= 1.0 - 1e-9);
        // Preparation books one state preparation and one diffusion call;
        // the walk books four diffusion calls.
        CHECK(ledger.state_preparations == 1);
        CHECK(ledger.quantum_diffusion_calls == 5);
    }
    SUBCASE("inverse walk undoes the walk") {
        std::mt19937_64 rng(4);
        const QuantumState original = random_system_state(4, 1, 1, rng);
        QuantumState state = original;
        CostLedger ledger;
        apply_walk(spec, state, &ledger);
        apply_walk_inverse(spec, state, &ledger);
        CHECK(distance(state, original) <= 1e-11);
        CHECK(ledger.quantum_diffusion_calls == 8);
    }
}

TEST_CASE("walk spectrum on the span matches the chain spectrum") {
    SUBCASE("two-state flip 0.25: eigenvalues e^{+-2 pi i / 3}") {
        const WalkSpec spec = make_walk_spec(two_state_symmetric(0.25));
        std::vector<double> phases = walk_eigenphases_on_span(spec);
        REQUIRE(phases.size() == 3);  // span dimension 2n - 1
        std::sort(phases.begin(), phases.end());
        CHECK(phases[0] == doctest::Approx(-2.0 * kPi / 3.0).epsilon(1e-8));
        CHECK(std::abs(phases[1]) <= 1e-8);
        CHECK(phases[2] == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-8));
    }
    SUBCASE("rank-one chain: all nonzero span phases sit at pi") {
        Distribution c;
        c.p = {0.4, 0.3, 0.2, 0.1};
        const WalkSpec spec = make_walk_spec(StochasticMatrix::rank_one(c));
        const std::vector<double> phases = walk_eigenphases_on_span(spec);
        REQUIRE(phases.size() == 7);
        int zero = 0, at_pi = 0;
        for (double phi : phases) {
            if (std::abs(phi) <= 1e-8) ++zero;
            if (std::abs(std::abs(phi) - kPi) <= 1e-8) ++at_pi;
        }
        CHECK(zero == 1);
        CHECK(at_pi == 6);
        CHECK(spec.phase_gap == doctest::Approx(kPi).epsilon(1e-10));
    }
    SUBCASE("every span phase halves to arccos of a chain eigenvalue") {
        for (const std::uint64_t seed : {1u, 2u, 3u}) {
            const StochasticMatrix P = random_reversible_chain(6, seed);
            const WalkSpec spec = make_walk_spec(P);
            const SpectralInfo info = spectral_info(P);
            const std::vector<double> phases = walk_eigenphases_on_span(spec);
            REQUIRE(phases.size() == 11);
            for (double phi : phases) {
                const double theta = std::abs(phi) / 2.0;
                double best = 1e9;
                for (const auto& ev : info.eigenvalues)
                    best = std::min(best, std::abs(theta - std::acos(std::min(1.0, std::abs(ev)))));
                CHECK(best <= 1e-8);
            }
            CHECK(phase_gap_from_span(spec) == doctest::Approx(spec.phase_gap).epsilon(1e-8));
        }
    }
}

TEST_CASE("span basis starts at the stationary pair state") {
    const WalkSpec spec = make_walk_spec(random_reversible_chain(5, 12));
    const auto basis = walk_span_basis(spec);
    REQUIRE(basis.size() == 9);
    const std::vector<double> pi_pair = pi_init_amplitudes(spec);
    double overlap = 0.0;
    for (std::size_t x = 0; x < 25; ++x) overlap += basis[0][x] * pi_pair[x];
    CHECK(std::abs(std::abs(overlap) - 1.0) <= 1e-10);
    // Orthonormality.
    for (std::size_t a = 0; a < basis.size(); ++a) {
        for (std::size_t b = a; b < basis.size(); ++b) {
            double dot = 0.0;
            for (std::size_t x = 0; x < 25; ++x) dot += basis[a][x] * basis[b][x];
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-10);
        }
    }
}

TEST_CASE("check reflection flips flagged first-register components") {
    SUBCASE("definition on a two-component state") {
        const double r = 1.0 / std::sqrt(2.0);
        QuantumState state = make_state(2, 1, 1);
        state.amp[state.index(0, 0, 0)] = r;
        state.amp[state.index(0, 1, 0)] = r;
        CostLedger ledger;
        check_reflection({0}, state, &ledger);
        CHECK(std::abs(state.amp[state.index(0, 0, 0)] + r) <= 1e-15);
        CHECK(std::abs(state.amp[state.index(0, 1, 0)] - r) <= 1e-15);
        CHECK(ledger.quantum_check_reflections == 1);
    }
    SUBCASE("flagging everything is a global phase") {
        std::mt19937_64 rng(3);
        const QuantumState original = random_system_state(3, 1, 1, rng);
        QuantumState state = original;
        check_reflection({0, 1, 2}, state);
        for (std::size_t i = 0; i < state.amp.size(); ++i)
            CHECK(std::abs(state.amp[i] + original.amp[i]) <= 1e-15);
    }
    SUBCASE("on the deliberation plane it reflects about the unflagged component") {
        const WalkSpec spec = make_walk_spec(random_reversible_chain(6, 44));
        const std::vector<std::size_t> flagged = {0, 1};
        const std::vector<double> t = tailed_state_amplitudes(spec, flagged);
        const std::vector<double> pi_pair = pi_init_amplitudes(spec);

        double eps = 0.0;
        for (std::size_t i : flagged) eps += spec.pi.p[i];
        // Unflagged complement: (|pi_pair> - sqrt(eps)|tailed>) / sqrt(1-eps).
        std::vector<double> u(36);
        for (std::size_t x = 0; x < 36; ++x)
            u[x] = (pi_pair[x] - std::sqrt(eps) * t[x]) / std::sqrt(1.0 - eps);

        QuantumState tailed_state = embed(t, 6, 1, 1);
        check_reflection(flagged, tailed_state);
        QuantumState minus_tailed = embed(t, 6, 1, 1);
        for (auto& a : minus_tailed.amp) a = -a;
        CHECK(distance(tailed_state, minus_tailed) <= 1e-12);

        QuantumState u_state = embed(u, 6, 1, 1);
        const QuantumState u_reference = u_state;
        check_reflection(flagged, u_state);
        CHECK(distance(u_state, u_reference) <= 1e-12);
    }
}

TEST_CASE("ideal reflection about the stationary pair state") {
    const WalkSpec spec = make_walk_spec(random_reversible_chain(4, 19));

    SUBCASE("fixes the stationary pair state") {
        QuantumState state = prepare_initial_state(spec, 1, 1);
        const QuantumState reference = state;
        ideal_reflection(spec, state);
        CHECK(distance(state, reference) <= 1e-12);
    }
    SUBCASE("negates orthogonal states and squares to the identity") {
        const auto basis = walk_span_basis(spec);
        QuantumState state = embed(basis[2], 4, 1, 1);
        const QuantumState reference = state;
        ideal_reflection(spec, state);
        QuantumState negated = reference;
        for (auto& a : negated.amp) a = -a;
        CHECK(distance(state, negated) <= 1e-12);
        ideal_reflection(spec, state);
        CHECK(distance(state, reference) <= 1e-12);
    }
}

TEST_CASE("stationary pair amplitudes and tailed restrictions") {
    const WalkSpec spec = make_walk_spec(random_reversible_chain(5, 23));

    const std::vector<double> pi_pair = pi_init_amplitudes(spec);
    double norm2 = 0.0;
    for (double a : pi_pair) norm2 += a * a;
    CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(pi_pair[i * 5 + j] ==
                  doctest::Approx(std::sqrt(spec.pi.p[i] * spec.P.p(j, i))).epsilon(1e-12));

    const std::vector<std::size_t> flagged = {1, 3};
    const std::vector<double> t = tailed_state_amplitudes(spec, flagged);
    const QuantumState tails = embed(t, 5, 1, 1);
    const std::vector<double> marginal = first_register_marginal(tails);
    Distribution empirical{marginal};
    const Distribution expected = tailed_distribution(spec.pi, {1, 3});
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(empirical.p[i] == doctest::Approx(expected.p[i]).epsilon(1e-10));

    CHECK_THROWS_AS(tailed_state_amplitudes(spec, {}), Error);
}

TEST_CASE("initial state preparation") {
    const WalkSpec spec = make_walk_spec(random_reversible_chain(6, 31));

    CostLedger ledger;
    const QuantumState state = prepare_initial_state(spec, 2, 2, &ledger);
    CHECK(ledger.state_preparations == 1);
    CHECK(ledger.quantum_diffusion_calls == 1);
    CHECK(std::abs(squared_norm(state) - 1.0) <= 1e-12);
    CHECK(ancilla_dirt(state) <= 1e-15);

    const std::vector<double> pi_pair = pi_init_amplitudes(spec);
    for (std::size_t x = 0; x < 36; ++x)
        CHECK(std::abs(state.amp[x] - pi_pair[x]) <= 1e-12);

    // Born statistics of the first register reproduce the stationary law.
    const std::vector<double> marginal = first_register_marginal(state);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(marginal[i] == doctest::Approx(spec.pi.p[i]).epsilon(1e-10));
}

TEST_CASE("double-diffusion preparation agrees on rank-one chains") {
    Distribution c;
    c.p = {0.35, 0.25, 0.25, 0.15};
    const WalkSpec spec = make_walk_spec(StochasticMatrix::rank_one(c));

    CostLedger direct_ledger, alt_ledger;
    const QuantumState direct = prepare_initial_state(spec, 1, 2, &direct_ledger);
    const QuantumState alt = prepare_initial_state_by_double_diffusion(spec, 1, 2, &alt_ledger);
    CHECK(distance(direct, alt) <= 1e-12);
    CHECK(alt_ledger.state_preparations == 1);
    CHECK(alt_ledger.quantum_diffusion_calls == 2);
}

TEST_CASE("first register measurement follows the Born rule") {
    const WalkSpec spec = make_walk_spec(StochasticMatrix::uniform(4));
    const QuantumState state = prepare_initial_state(spec, 1, 1);

    std::mt19937_64 rng(77);
    CostLedger ledger;
    std::vector<int> counts(4, 0);
    const int samples = 100000;
    for (int i = 0; i < samples; ++i)
        ++counts[measure_first_register(state, rng, &ledger)];
    for (int c0 : counts)
        CHECK(static_cast<double>(c0) / samples == doctest::Approx(0.25).epsilon(0.05));
    CHECK(ledger.measurements == samples);

    // Determinism contract: a reseeded generator replays the sequence.
    std::mt19937_64 a(5), b(5);
    for (int i = 0; i < 100; ++i)
        CHECK(measure_first_register(state, a) == measure_first_register(state, b));
}

TEST_CASE("POVM flag projection") {
    const WalkSpec spec = make_walk_spec(random_reversible_chain(5, 41));
    const QuantumState state = prepare_initial_state(spec, 1, 1);
    const std::vector<std::size_t> flagged = {0, 2};
    const double eps = spec.pi.p[0] + spec.pi.p[2];

    // Branch frequencies follow the flagged stationary mass.
    std::mt19937_64 rng(13);
    int flagged_hits = 0;
    const int samples = 20000;
    for (int i = 0; i < samples; ++i) {
        const PovmOutcome out = povm_flag_projection(state, flagged, rng);
        CHECK(std::abs(squared_norm(out.post) - 1.0) <= 1e-10);
        if (out.flagged_branch) ++flagged_hits;
    }
    CHECK(static_cast<double>(flagged_hits) / samples == doctest::Approx(eps).epsilon(0.06));

    // The flagged projection of the stationary pair state is the tailed state.
    std::mt19937_64 hunting(1);
    for (;;) {
        const PovmOutcome out = povm_flag_projection(state, flagged, hunting);
        if (!out.flagged_branch) continue;
        const QuantumState tails = embed(tailed_state_amplitudes(spec, flagged), 5, 1, 1);
        CHECK(fidelity(out.post, tails) >= 1.0 - 1e-10);
        break;
    }
}
