#include "reflectron/reflection.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "reflectron/errors.hpp"

namespace reflectron {

namespace {

constexpr double kPi = 3.14159265358979323846;

/*
 * How much of the state may sit outside the clean ancilla block before the
 * reflection refuses to run. Sequential reflections within one try leave
 * bounded residue (at most check_cap * 2^{1-k} in norm); anything above
 * this is a caller handing in garbage ancillas.
 */
constexpr double kAncillaDirtTolerance = 0.3;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/* y = M x on every ancilla block whose control bit is set. */
void apply_controlled(const RowMajor& M, QuantumState& state, int control_bit,
                      std::vector<std::complex<double>>& scratch) {
    const std::size_t d = state.system_dim();
    const std::size_t mask = std::size_t{1} << control_bit;
    if (scratch.size() < d) scratch.resize(d);
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a) {
        if (!(a & mask)) continue;
        std::complex<double>* block = state.amp.data() + a * d;
        for (std::size_t r = 0; r < d; ++r) {
            const double* row = M.data() + r * d;
            std::complex<double> acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += row[c] * block[c];
            scratch[r] = acc;
        }
        std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(d), block);
    }
}

void hadamard_on_bit(QuantumState& state, int bit) {
    const std::size_t d = state.system_dim();
    const std::size_t mask = std::size_t{1} << bit;
    const double inv_rt2 = 0.70710678118654752;
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a) {
        if (a & mask) continue;
        std::complex<double>* lo = state.amp.data() + a * d;
        std::complex<double>* hi = state.amp.data() + (a | mask) * d;
        for (std::size_t x = 0; x < d; ++x) {
            const std::complex<double> v0 = lo[x], v1 = hi[x];
            lo[x] = (v0 + v1) * inv_rt2;
            hi[x] = (v0 - v1) * inv_rt2;
        }
    }
}

/* Real rotation [[cos g, -sin g], [sin g, cos g]] on one ancilla qubit. */
void rotate_y_on_bit(QuantumState& state, int bit, double gamma) {
    const std::size_t d = state.system_dim();
    const std::size_t mask = std::size_t{1} << bit;
    const double c = std::cos(gamma), s = std::sin(gamma);
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a) {
        if (a & mask) continue;
        std::complex<double>* lo = state.amp.data() + a * d;
        std::complex<double>* hi = state.amp.data() + (a | mask) * d;
        for (std::size_t x = 0; x < d; ++x) {
            const std::complex<double> v0 = lo[x], v1 = hi[x];
            lo[x] = c * v0 - s * v1;
            hi[x] = s * v0 + c * v1;
        }
    }
}

/*
 * Fourier transform on one s-qubit ancilla register (bits [base, base+s)),
 * sign = -1 for the inverse. Qubit q of the register weighs 2^q in the
 * transformed value, matching the controlled power it drove; the all-zero
 * row is uniform either way, which is the only row the reflection's
 * contract depends on.
 */
void fourier_on_register(QuantumState& state, int base, int s, int sign,
                         std::vector<std::complex<double>>& scratch) {
    const std::size_t d = state.system_dim();
    const std::size_t N = std::size_t{1} << s;
    const std::size_t low_mask = (std::size_t{1} << base) - 1;

    std::vector<std::complex<double>> F(N * N);
    const double unit = sign * 2.0 * kPi / static_cast<double>(N);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (std::size_t v = 0; v < N; ++v)
        for (std::size_t u = 0; u < N; ++u)
            F[v * N + u] = std::polar(scale, unit * static_cast<double>(v * u));

    scratch.resize(N * d);
    const std::size_t groups = state.ancilla_dim() >> s;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t low = g & low_mask;
        const std::size_t high = (g & ~low_mask) << s;
        for (std::size_t v = 0; v < N; ++v) {
            const std::complex<double>* src =
                state.amp.data() + (high | (v << base) | low) * d;
            std::copy(src, src + d, scratch.begin() + v * d);
        }
        for (std::size_t v = 0; v < N; ++v) {
            std::complex<double>* dst = state.amp.data() + (high | (v << base) | low) * d;
            for (std::size_t x = 0; x < d; ++x) {
                std::complex<double> acc = 0.0;
                for (std::size_t u = 0; u < N; ++u) acc += F[v * N + u] * scratch[u * d + x];
                dst[x] = acc;
            }
        }
    }
}

void flip_nonzero_ancilla(QuantumState& state) {
    const std::size_t d = state.system_dim();
    for (std::size_t a = 1; a < state.ancilla_dim(); ++a) {
        std::complex<double>* block = state.amp.data() + a * d;
        for (std::size_t x = 0; x < d; ++x) block[x] = -block[x];
    }
}

/* Angles of the single-ancilla round, in application order. */
constexpr double kGqspAngles[3] = {-kPi / 8.0, -kPi / 4.0, 3.0 * kPi / 8.0};

std::complex<double> gqsp_matrix_entry00(double phi) {
    using C = std::complex<double>;
    const C z = std::polar(1.0, phi);
    C m[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
    auto left_multiply_rotation = [&m](double g) {
        const double c = std::cos(g), s = std::sin(g);
        for (int col = 0; col < 2; ++col) {
            const C v0 = m[0][col], v1 = m[1][col];
            m[0][col] = c * v0 - s * v1;
            m[1][col] = s * v0 + c * v1;
        }
    };
    auto left_multiply_phase = [&m, &z]() {
        m[1][0] *= z;
        m[1][1] *= z;
    };
    left_multiply_rotation(kGqspAngles[0]);
    left_multiply_phase();
    left_multiply_rotation(kGqspAngles[1]);
    left_multiply_phase();
    left_multiply_rotation(kGqspAngles[2]);
    return m[0][0];
}

/*
 * The fixed angles must keep realizing the kernel ((1+z)/2)^2; anything
 * else silently breaks the 2^{1-k} contract. Checked once per process.
 */
void verify_gqsp_angles_once() {
    static const bool ok = [] {
        for (int g = 0; g <= 32; ++g) {
            const double phi = kPi * static_cast<double>(g) / 32.0;
            const std::complex<double> z = std::polar(1.0, phi);
            const std::complex<double> want = std::pow((1.0 + z) / 2.0, 2);
            if (std::abs(gqsp_matrix_entry00(phi) - want) > 1e-12)
                throw NumericalFailure("single-ancilla round angles lost their kernel");
        }
        return true;
    }();
    (void)ok;
}

}  // namespace

void QuantumParams::validate() const {
    if (s < 1 || k < 1 || check_cap < 1 || retry_cap < 1)
        throw DimensionMismatch("QuantumParams: s, k, check_cap, retry_cap must be >= 1");
    if (!(t_constant > 0.0)) throw DimensionMismatch("QuantumParams: t_constant must be > 0");
    // No k*s ceiling here: plane-algebra deliberators only price the
    // ancillas; the state-vector path is capped where states materialize.
}

QuantumParams derive_quantum_params(double phase_gap, double eps, const AgentConfig& cfg,
                                    double t_constant) {
    cfg.validate();
    if (!(phase_gap > 0.0)) throw NonErgodic("derive_quantum_params: nonpositive phase gap");
    if (!(eps > 0.0)) throw ZeroFlagMass("derive_quantum_params: nonpositive flagged mass");
    if (eps > 1.0 + 1e-12)
        throw DimensionMismatch("derive_quantum_params: flagged mass above 1");
    if (!(t_constant > 0.0))
        throw DimensionMismatch("derive_quantum_params: t_constant must be > 0");

    QuantumParams params;
    params.s = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / phase_gap))) + 2);
    const double root_eps = std::sqrt(std::min(eps, 1.0));
    params.k = cfg.k1 + std::max(0, static_cast<int>(std::ceil(std::log2(1.0 / root_eps))));
    params.check_cap =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(t_constant / root_eps)));
    params.retry_cap = cfg.k3;
    params.t_constant = t_constant;
    params.validate();
    return params;
}

std::uint64_t aro_walk_calls(int k, int s) {
    if (k < 1 || s < 1) throw DimensionMismatch("aro_walk_calls: k and s must be >= 1");
    const auto rounds = static_cast<std::uint64_t>(k);
    if (s == 1) return 4 * rounds;
    return rounds * 2 * ((std::uint64_t{1} << s) - 1);
}

std::complex<double> pe_round_kernel(int s, double phi) {
    if (s < 1) throw DimensionMismatch("pe_round_kernel: s must be >= 1");
    const std::size_t N = std::size_t{1} << s;
    std::complex<double> acc = 0.0;
    for (std::size_t x = 0; x < N; ++x) acc += std::polar(1.0, phi * static_cast<double>(x));
    return acc / static_cast<double>(N);
}

std::complex<double> gqsp_round_kernel(double phi) {
    return gqsp_matrix_entry00(phi);
}

void approximate_reflection(const WalkSpec& spec, const QuantumParams& params,
                            QuantumState& state, CostLedger* ledger) {
    params.validate();
    if (state.n != spec.P.n())
        throw DimensionMismatch("approximate_reflection: register size mismatch");
    if (state.k != params.k || state.s != params.s)
        throw DimensionMismatch("approximate_reflection: ancilla layout mismatch");
    if (ancilla_dirt(state) > kAncillaDirtTolerance)
        throw AncillaNotClean("approximate_reflection: ancillas are not clean on entry");

    const std::size_t d = state.system_dim();
    const auto wr = walk_matrix_rowmajor(spec);
    const Eigen::Map<const RowMajor> W(wr.data(), static_cast<Eigen::Index>(d),
                                       static_cast<Eigen::Index>(d));

    // W^{2^j} by repeated squaring, plus transposes: the walk matrix is
    // real orthogonal, so the transpose is the inverse power.
    std::vector<RowMajor> pow2{W};
    for (int j = 1; j < params.s; ++j)
        pow2.push_back(pow2.back() * pow2.back());
    std::vector<RowMajor> pow2_inv;
    pow2_inv.reserve(pow2.size());
    for (const auto& M : pow2) pow2_inv.push_back(M.transpose());

    std::vector<std::complex<double>> scratch(d);
    std::uint64_t walk_apps = 0;

    auto estimation_round = [&](int r, bool inverse) {
        const int base = r * params.s;
        if (params.s == 1) {
            verify_gqsp_angles_once();
            if (!inverse) {
                rotate_y_on_bit(state, base, kGqspAngles[0]);
                apply_controlled(pow2[0], state, base, scratch);
                walk_apps += 1;
                rotate_y_on_bit(state, base, kGqspAngles[1]);
                apply_controlled(pow2[0], state, base, scratch);
                walk_apps += 1;
                rotate_y_on_bit(state, base, kGqspAngles[2]);
            } else {
                rotate_y_on_bit(state, base, -kGqspAngles[2]);
                apply_controlled(pow2_inv[0], state, base, scratch);
                walk_apps += 1;
                rotate_y_on_bit(state, base, -kGqspAngles[1]);
                apply_controlled(pow2_inv[0], state, base, scratch);
                walk_apps += 1;
                rotate_y_on_bit(state, base, -kGqspAngles[0]);
            }
            return;
        }
        if (!inverse) {
            for (int q = 0; q < params.s; ++q) hadamard_on_bit(state, base + q);
            for (int j = 0; j < params.s; ++j) {
                apply_controlled(pow2[static_cast<std::size_t>(j)], state, base + j, scratch);
                walk_apps += std::uint64_t{1} << j;
            }
            fourier_on_register(state, base, params.s, -1, scratch);
        } else {
            fourier_on_register(state, base, params.s, +1, scratch);
            for (int j = params.s - 1; j >= 0; --j) {
                apply_controlled(pow2_inv[static_cast<std::size_t>(j)], state, base + j, scratch);
                walk_apps += std::uint64_t{1} << j;
            }
            for (int q = params.s - 1; q >= 0; --q) hadamard_on_bit(state, base + q);
        }
    };

    for (int r = 0; r < params.k; ++r) estimation_round(r, false);
    flip_nonzero_ancilla(state);
    for (int r = params.k - 1; r >= 0; --r) estimation_round(r, true);

    if (ledger) {
        ledger->aro_invocations += 1;
        ledger->quantum_diffusion_calls += 4 * walk_apps;
    }
}

}  // namespace reflectron
