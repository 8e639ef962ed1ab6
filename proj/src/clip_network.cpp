#include "reflectron/clip_network.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "reflectron/errors.hpp"
#include "reflectron/markov.hpp"

namespace reflectron {

namespace {

void check_percept(const ClipNetwork& net, std::size_t percept, const char* who) {
    if (percept >= net.num_percepts())
        throw DimensionMismatch(std::string(who) + ": no percept " + std::to_string(percept));
}

Distribution normalized_row(const ClipNetwork& net, std::size_t percept, const char* who) {
    const auto& row = net.percept_row(percept);
    double sum = 0.0;
    for (double w : row) sum += w;
    if (!(sum > 0.0))
        throw DanglingClip(std::string(who) + ": percept " + std::to_string(percept) +
                           " has zero outgoing weight");
    std::vector<double> p(row.size());
    for (std::size_t a = 0; a < row.size(); ++a) p[a] = row[a] / sum;
    return Distribution(std::move(p));
}

}  // namespace

void ClipNetwork::validate() const {
    if (m_ == 0 || n_ == 0)
        throw DimensionMismatch("ClipNetwork: need at least one percept and one action");
    if (rows_.size() != m_) throw DimensionMismatch("ClipNetwork: row count mismatch");
    for (const auto& row : rows_) {
        if (row.size() != n_) throw DimensionMismatch("ClipNetwork: ragged h-row");
        for (double w : row) {
            if (!std::isfinite(w) || w < 0.0)
                throw DimensionMismatch("ClipNetwork: weights must be finite and >= 0");
            if (w != 0.0 && w < 1.0)
                throw DimensionMismatch("ClipNetwork: existing edges need weight >= 1");
        }
    }
    if (kind_ == SubchainKind::steered_gap &&
        (!(subchain_gap_ > 0.0) || subchain_gap_ > 1.0))
        throw DimensionMismatch("ClipNetwork: steered subchain needs a gap in (0, 1]");
}

ClipNetwork ClipNetwork::two_layer(std::size_t num_percepts, std::size_t num_actions,
                                   SubchainKind kind, double subchain_gap) {
    return from_rows(
        std::vector<std::vector<double>>(num_percepts, std::vector<double>(num_actions, 1.0)),
        kind, subchain_gap);
}

ClipNetwork ClipNetwork::from_rows(std::vector<std::vector<double>> rows, SubchainKind kind,
                                   double subchain_gap) {
    ClipNetwork net;
    net.m_ = rows.size();
    net.n_ = rows.empty() ? 0 : rows.front().size();
    net.kind_ = kind;
    net.subchain_gap_ = subchain_gap;
    net.rows_ = std::move(rows);
    net.validate();
    return net;
}

double ClipNetwork::h(std::size_t percept, std::size_t action) const {
    check_percept(*this, percept, "ClipNetwork::h");
    if (action >= n_) throw DimensionMismatch("ClipNetwork::h: no action " + std::to_string(action));
    return rows_[percept][action];
}

const std::vector<double>& ClipNetwork::percept_row(std::size_t percept) const {
    check_percept(*this, percept, "ClipNetwork::percept_row");
    return rows_[percept];
}

FlagSet FlagSet::all(std::size_t num_percepts, std::size_t num_actions) {
    if (num_percepts == 0 || num_actions == 0)
        throw DimensionMismatch("FlagSet::all: empty percept or action space");
    FlagSet fs;
    fs.n_ = num_actions;
    ActionSet everything(num_actions);
    for (std::size_t a = 0; a < num_actions; ++a) everything[a] = a;
    fs.sets_.assign(num_percepts, everything);
    return fs;
}

const ActionSet& FlagSet::set_for(std::size_t percept) const {
    if (percept >= sets_.size())
        throw DimensionMismatch("FlagSet::set_for: no percept " + std::to_string(percept));
    return sets_[percept];
}

bool FlagSet::is_flagged(std::size_t percept, std::size_t action) const {
    const ActionSet& s = set_for(percept);
    return std::binary_search(s.begin(), s.end(), action);
}

FlagSet FlagSet::with_set(std::size_t percept, ActionSet actions) const {
    if (percept >= sets_.size())
        throw DimensionMismatch("FlagSet::with_set: no percept " + std::to_string(percept));
    if (actions.empty()) throw DimensionMismatch("FlagSet::with_set: flag sets must be non-empty");
    std::sort(actions.begin(), actions.end());
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    if (actions.back() >= n_)
        throw DimensionMismatch("FlagSet::with_set: action index out of range");
    FlagSet out = *this;
    out.sets_[percept] = std::move(actions);
    return out;
}

void AgentConfig::validate() const {
    if (!(gamma >= 0.0) || gamma > 1.0)
        throw DimensionMismatch("AgentConfig: gamma must be in [0, 1]");
    if (!(lambda > 0.0)) throw DimensionMismatch("AgentConfig: lambda must be > 0");
    if (k1 < 1 || k3 < 1) throw DimensionMismatch("AgentConfig: k1 and k3 must be >= 1");
}

StochasticMatrix transition_matrix_from_h(const ClipNetwork& net, std::size_t percept) {
    check_percept(net, percept, "transition_matrix_from_h");
    const Distribution row = normalized_row(net, percept, "transition_matrix_from_h");
    switch (net.kind()) {
        case SubchainKind::rank_one:
            return StochasticMatrix::rank_one(row);
        case SubchainKind::steered_gap: {
            // The steered construction needs strictly positive mass on every
            // action clip; absent edges would disconnect the chain.
            for (std::size_t a = 0; a < row.size(); ++a)
                if (!(row[a] > 0.0))
                    throw DanglingClip("transition_matrix_from_h: steered subchain needs every "
                                       "edge present");
            return reversible_chain_with_stationary(row, net.subchain_gap());
        }
    }
    throw DimensionMismatch("transition_matrix_from_h: unknown subchain kind");
}

StochasticMatrix simple_rps_from_standard(const ClipNetwork& net, std::size_t percept) {
    check_percept(net, percept, "simple_rps_from_standard");
    return StochasticMatrix::rank_one(normalized_row(net, percept, "simple_rps_from_standard"));
}

ClipNetwork update_h(const ClipNetwork& net, const std::vector<Edge>& traversed, bool rewarded,
                     const AgentConfig& cfg) {
    cfg.validate();
    ClipNetwork out = net;
    // Global dissipation: every existing edge relaxes toward 1.
    for (auto& row : out.rows_)
        for (double& w : row)
            if (w != 0.0) w -= cfg.gamma * (w - 1.0);
    if (rewarded) {
        for (const Edge& e : traversed) {
            if (e.percept >= out.m_ || e.action >= out.n_ ||
                net.rows_[e.percept][e.action] == 0.0)
                throw DimensionMismatch("update_h: traversed edge does not exist");
            out.rows_[e.percept][e.action] += cfg.lambda;
        }
    } else {
        for (const Edge& e : traversed)
            if (e.percept >= out.m_ || e.action >= out.n_ ||
                net.rows_[e.percept][e.action] == 0.0)
                throw DimensionMismatch("update_h: traversed edge does not exist");
    }
    ++out.version_;
    return out;
}

Distribution tailed_distribution(const Distribution& pi, const ActionSet& flagged) {
    if (flagged.empty()) throw DimensionMismatch("tailed_distribution: empty flag set");
    for (std::size_t i : flagged)
        if (i >= pi.size())
            throw DimensionMismatch("tailed_distribution: flagged index out of range");
    double mass = 0.0;
    for (std::size_t i : flagged) mass += pi[i];
    if (!(mass > 0.0)) throw ZeroFlagMass("tailed_distribution: flagged set carries no mass");
    std::vector<double> out(pi.size(), 0.0);
    for (std::size_t i : flagged) out[i] = pi[i] / mass;
    return Distribution(std::move(out));
}

FlagSet flag_update(const FlagSet& flags, std::size_t percept, std::size_t action,
                    bool rewarded) {
    if (!flags.is_flagged(percept, action))
        throw ActionNotFlagged("flag_update: action " + std::to_string(action) +
                               " is not flagged for percept " + std::to_string(percept));
    if (rewarded) return flags;
    ActionSet remaining = flags.set_for(percept);
    remaining.erase(std::remove(remaining.begin(), remaining.end(), action), remaining.end());
    if (remaining.empty()) {
        // Depleted: reset to all actions.
        remaining.resize(flags.num_actions());
        for (std::size_t a = 0; a < remaining.size(); ++a) remaining[a] = a;
    }
    return flags.with_set(percept, std::move(remaining));
}

std::string ecm_to_json(const ClipNetwork& net, const FlagSet& flags) {
    using nlohmann::json;
    const std::size_t m = net.num_percepts(), n = net.num_actions();
    json out;
    out["percepts"] = json::array();
    for (std::size_t p = 0; p < m; ++p) out["percepts"].push_back(p);
    out["actions"] = json::array();
    for (std::size_t a = 0; a < n; ++a) out["actions"].push_back(m + a);
    json triplets = json::array();
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t a = 0; a < n; ++a)
            if (net.h(p, a) != 0.0) triplets.push_back({p, m + a, net.h(p, a)});
    out["h"] = std::move(triplets);
    json flag_map = json::object();
    for (std::size_t p = 0; p < m; ++p) flag_map[std::to_string(p)] = flags.set_for(p);
    out["flags"] = std::move(flag_map);
    out["subchain"] = net.kind() == SubchainKind::rank_one ? "rank-one" : "steered-gap";
    out["subchain_gap"] = net.subchain_gap();
    return out.dump();
}

std::pair<ClipNetwork, FlagSet> ecm_from_json(const std::string& text) {
    using nlohmann::json;
    json in;
    try {
        in = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DimensionMismatch(std::string("ecm_from_json: bad JSON: ") + e.what());
    }
    if (!in.contains("percepts") || !in.contains("actions") || !in.contains("h"))
        throw DimensionMismatch("ecm_from_json: missing percepts/actions/h");
    const std::size_t m = in["percepts"].size();
    const std::size_t n = in["actions"].size();
    if (m == 0 || n == 0) throw DimensionMismatch("ecm_from_json: empty clip space");

    std::vector<std::vector<double>> rows(m, std::vector<double>(n, 0.0));
    for (const auto& t : in["h"]) {
        if (!t.is_array() || t.size() != 3)
            throw DimensionMismatch("ecm_from_json: h entries are (from, to, weight)");
        const auto from = t[0].get<std::size_t>();
        const auto to = t[1].get<std::size_t>();
        if (from >= m || to < m || to >= m + n)
            throw DimensionMismatch("ecm_from_json: edge endpoints out of range");
        rows[from][to - m] = t[2].get<double>();
    }
    SubchainKind kind = SubchainKind::rank_one;
    if (in.value("subchain", "rank-one") == std::string("steered-gap"))
        kind = SubchainKind::steered_gap;
    ClipNetwork net = ClipNetwork::from_rows(std::move(rows), kind, in.value("subchain_gap", 0.0));

    FlagSet flags = FlagSet::all(m, n);
    if (in.contains("flags"))
        for (const auto& [key, value] : in["flags"].items())
            flags = flags.with_set(std::stoul(key), value.get<ActionSet>());
    return {std::move(net), std::move(flags)};
}

}  // namespace reflectron
