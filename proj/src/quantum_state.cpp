#include "reflectron/quantum_state.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "reflectron/errors.hpp"
#include "reflectron/rng.hpp"
#include "reflectron/tolerances.hpp"

namespace reflectron {

namespace {

void check_shape(std::size_t n, int k, int s) {
    if (n == 0) throw DimensionMismatch("quantum state: need n >= 1");
    if (k < 0 || s < 0) throw DimensionMismatch("quantum state: negative ancilla layout");
    // 2^{ks} blocks of n^2 amplitudes have to stay addressable and sane.
    if (k * s > 30) throw DimensionMismatch("quantum state: ancilla space too large");
}

}  // namespace

QuantumState make_state(std::size_t n, int k, int s) {
    check_shape(n, k, s);
    QuantumState state;
    state.n = n;
    state.k = k;
    state.s = s;
    state.amp.assign(state.dim(), {0.0, 0.0});
    return state;
}

QuantumState basis_state(std::size_t n, int k, int s, std::size_t i, std::size_t j) {
    if (i >= n || j >= n) throw DimensionMismatch("basis_state: node index out of range");
    QuantumState state = make_state(n, k, s);
    state.amp[state.index(0, i, j)] = 1.0;
    return state;
}

QuantumState with_clean_ancillas(std::size_t n, int k, int s,
                                 const std::vector<std::complex<double>>& system) {
    if (system.size() != n * n)
        throw DimensionMismatch("with_clean_ancillas: system vector is not n^2 long");
    QuantumState state = make_state(n, k, s);
    std::copy(system.begin(), system.end(), state.amp.begin());
    return state;
}

double squared_norm(const QuantumState& state) {
    double total = 0.0;
    for (const auto& z : state.amp) total += std::norm(z);
    return total;
}

void require_normalized(const QuantumState& state, const char* where) {
    const double nrm = std::sqrt(squared_norm(state));
    if (std::abs(nrm - 1.0) > tol().state_norm)
        throw NumericalFailure(std::string(where) + ": state norm drifted from 1");
}

std::complex<double> inner_product(const QuantumState& a, const QuantumState& b) {
    if (a.n != b.n || a.k != b.k || a.s != b.s)
        throw DimensionMismatch("inner_product: shape mismatch");
    std::complex<double> acc = 0.0;
    for (std::size_t x = 0; x < a.amp.size(); ++x) acc += std::conj(a.amp[x]) * b.amp[x];
    return acc;
}

double fidelity(const QuantumState& a, const QuantumState& b) {
    return std::abs(inner_product(a, b));
}

std::vector<double> first_register_marginal(const QuantumState& state) {
    std::vector<double> w(state.n, 0.0);
    const std::size_t n = state.n;
    const std::size_t blocks = state.ancilla_dim();
    for (std::size_t a = 0; a < blocks; ++a)
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double>* row = state.amp.data() + state.index(a, i, 0);
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += std::norm(row[j]);
            w[i] += acc;
        }
    return w;
}

double ancilla_dirt(const QuantumState& state) {
    double clean = 0.0;
    for (std::size_t x = 0; x < state.system_dim(); ++x) clean += std::norm(state.amp[x]);
    const double total = squared_norm(state);
    return std::sqrt(std::max(0.0, total - clean));
}

std::size_t measure_first_register(const QuantumState& state, std::mt19937_64& rng,
                                   CostLedger* ledger) {
    const std::size_t i = sample_weights(rng, first_register_marginal(state));
    if (ledger) ledger->measurements += 1;
    return i;
}

PovmOutcome povm_flag_projection(const QuantumState& state,
                                 const std::vector<std::size_t>& flagged,
                                 std::mt19937_64& rng, CostLedger* ledger) {
    std::vector<char> is_flagged(state.n, 0);
    for (std::size_t i : flagged) {
        if (i >= state.n) throw DimensionMismatch("povm_flag_projection: node out of range");
        is_flagged[i] = 1;
    }

    const std::vector<double> w = first_register_marginal(state);
    double p_flag = 0.0;
    for (std::size_t i = 0; i < state.n; ++i)
        if (is_flagged[i]) p_flag += w[i];

    const bool branch = uniform01(rng) < p_flag;
    const double p_branch = branch ? p_flag : 1.0 - p_flag;
    if (p_branch < 1e-14)
        throw DegenerateBranch("povm_flag_projection: sampled branch has no mass");
    if (ledger) ledger->measurements += 1;

    PovmOutcome out;
    out.flagged_branch = branch;
    out.post = state;
    const double scale = 1.0 / std::sqrt(p_branch);
    const std::size_t n = state.n;
    for (std::size_t a = 0; a < state.ancilla_dim(); ++a)
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double>* row = out.post.amp.data() + out.post.index(a, i, 0);
            const bool keep = (is_flagged[i] != 0) == branch;
            for (std::size_t j = 0; j < n; ++j) row[j] = keep ? row[j] * scale : 0.0;
        }
    return out;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& at) {
    if (at + 4 > in.size()) throw DimensionMismatch("state file: truncated header");
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at++])) << (8 * b);
    return v;
}

double get_f64(const std::string& in, std::size_t& at) {
    if (at + 8 > in.size()) throw DimensionMismatch("state file: truncated amplitudes");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at++])) << (8 * b);
    double v = 0.0;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

void write_state(const std::string& path, const QuantumState& state) {
    std::string bytes;
    bytes.reserve(12 + 16 * state.amp.size());
    put_u32(bytes, static_cast<std::uint32_t>(state.n));
    put_u32(bytes, static_cast<std::uint32_t>(state.k));
    put_u32(bytes, static_cast<std::uint32_t>(state.s));
    for (const auto& z : state.amp) {
        put_f64(bytes, z.real());
        put_f64(bytes, z.imag());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalFailure("write_state: cannot open " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw NumericalFailure("write_state: short write to " + path);
}

QuantumState read_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericalFailure("read_state: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t at = 0;
    const std::uint32_t n = get_u32(bytes, at);
    const std::uint32_t k = get_u32(bytes, at);
    const std::uint32_t s = get_u32(bytes, at);
    QuantumState state = make_state(n, static_cast<int>(k), static_cast<int>(s));
    if (bytes.size() != at + 16 * state.dim())
        throw DimensionMismatch("state file: size disagrees with header");
    for (auto& z : state.amp) {
        const double re = get_f64(bytes, at);
        const double im = get_f64(bytes, at);
        z = {re, im};
    }
    return state;
}

void write_state_sidecar(const std::string& path, const StateMeta& meta) {
    nlohmann::json doc;
    doc["chain_hash"] = meta.chain_hash;
    doc["seed"] = meta.seed;
    std::ofstream out(path + ".json");
    if (!out) throw NumericalFailure("write_state_sidecar: cannot open " + path + ".json");
    out << doc.dump(2) << '\n';
}

StateMeta read_state_sidecar(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) throw NumericalFailure("read_state_sidecar: cannot open " + path + ".json");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw DimensionMismatch(std::string("state sidecar: ") + e.what());
    }
    StateMeta meta;
    meta.chain_hash = doc.at("chain_hash").get<std::string>();
    meta.seed = doc.at("seed").get<std::uint64_t>();
    return meta;
}

}  // namespace reflectron
