#pragma once

#include <cstdint>
#include <string>

#include "reflectron/cost_ledger.hpp"
#include "reflectron/stochastic_matrix.hpp"

namespace reflectron {

/*
 * Chain wire format (JSON):
 *
 *   { "n": 2,
 *     "columns": [[0.75, 0.25], [0.25, 0.75]],
 *     "convention": "column-stochastic" }
 *
 * columns[i][j] = Prob(j | i). Doubles are emitted with shortest
 * round-trip precision, so parse(dump(P)) reproduces P bit-exactly.
 */
std::string chain_to_json(const StochasticMatrix& P);
StochasticMatrix chain_from_json(const std::string& text);

/* Flat counter object keyed by the seven ledger field names. */
std::string ledger_to_json(const CostLedger& ledger);
CostLedger ledger_from_json(const std::string& text);

/* FNV-1a 64-bit, hex-encoded; used for chain hashes and config hashes. */
std::string fnv1a_hex(const std::string& bytes);

/* Content hash of a chain (hash of its canonical JSON form). */
std::string chain_hash(const StochasticMatrix& P);

}  // namespace reflectron
