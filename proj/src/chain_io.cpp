#include "reflectron/chain_io.hpp"

#include <json.hpp>

#include "reflectron/errors.hpp"

namespace reflectron {

namespace {

using nlohmann::json;

}  // namespace

std::string chain_to_json(const StochasticMatrix& P) {
    json cols = json::array();
    for (std::size_t i = 0; i < P.n(); ++i) {
        json col = json::array();
        for (std::size_t j = 0; j < P.n(); ++j) col.push_back(P.p(j, i));
        cols.push_back(std::move(col));
    }
    json out;
    out["n"] = P.n();
    out["columns"] = std::move(cols);
    out["convention"] = "column-stochastic";
    return out.dump();
}

StochasticMatrix chain_from_json(const std::string& text) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DimensionMismatch(std::string("chain_from_json: bad JSON: ") + e.what());
    }
    if (!in.contains("n") || !in.contains("columns"))
        throw DimensionMismatch("chain_from_json: missing 'n' or 'columns'");
    if (in.contains("convention") && in["convention"] != "column-stochastic")
        throw DimensionMismatch("chain_from_json: unknown convention");

    const auto n = in["n"].get<std::size_t>();
    const auto& cols = in["columns"];
    if (!cols.is_array() || cols.size() != n)
        throw DimensionMismatch("chain_from_json: expected " + std::to_string(n) + " columns");
    std::vector<std::vector<double>> columns;
    columns.reserve(n);
    for (const auto& col : cols) {
        if (!col.is_array() || col.size() != n)
            throw DimensionMismatch("chain_from_json: ragged column");
        columns.push_back(col.get<std::vector<double>>());
    }
    return StochasticMatrix::from_columns(columns);
}

std::string ledger_to_json(const CostLedger& ledger) {
    json out;
    out["classical_diffusions"] = ledger.classical_diffusions;
    out["classical_checks"] = ledger.classical_checks;
    out["quantum_diffusion_calls"] = ledger.quantum_diffusion_calls;
    out["quantum_check_reflections"] = ledger.quantum_check_reflections;
    out["aro_invocations"] = ledger.aro_invocations;
    out["measurements"] = ledger.measurements;
    out["state_preparations"] = ledger.state_preparations;
    return out.dump();
}

CostLedger ledger_from_json(const std::string& text) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DimensionMismatch(std::string("ledger_from_json: bad JSON: ") + e.what());
    }
    CostLedger out;
    out.classical_diffusions = in.value("classical_diffusions", 0ULL);
    out.classical_checks = in.value("classical_checks", 0ULL);
    out.quantum_diffusion_calls = in.value("quantum_diffusion_calls", 0ULL);
    out.quantum_check_reflections = in.value("quantum_check_reflections", 0ULL);
    out.aro_invocations = in.value("aro_invocations", 0ULL);
    out.measurements = in.value("measurements", 0ULL);
    out.state_preparations = in.value("state_preparations", 0ULL);
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string chain_hash(const StochasticMatrix& P) { return fnv1a_hex(chain_to_json(P)); }

}  // namespace reflectron
