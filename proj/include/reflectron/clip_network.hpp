#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reflectron/cost_ledger.hpp"
#include "reflectron/distribution.hpp"
#include "reflectron/stochastic_matrix.hpp"

namespace reflectron {

/* A sorted, duplicate-free set of action indices in {0, ..., n_actions-1}. */
using ActionSet = std::vector<std::size_t>;

/** @brief How a percept's deliberation chain is derived from its h-row. */
enum class SubchainKind {
    /* Column-constant chain whose every column is the normalized h-row.
       Mixes in one step (spectral gap exactly 1). */
    rank_one,
    /* Reversible chain with stationary vector proportional to the h-row and
       a prescribed spectral gap; the slow-mixing regime for the budgeted
       deliberation experiments. Uses reversible_chain_with_stationary. */
    steered_gap,
};

/**
 * @brief Two-layer episodic clip memory.
 *
 * Clips carry dense integer labels: percepts are 0..m-1, actions are
 * m..m+n-1. Edge weights live on the percept -> action edges (the h-row of
 * each percept); every existing edge has weight >= 1 and each percept is
 * connected to every action. Each percept is additionally assigned a
 * Markov chain over the full action clip set, derived from its h-row per
 * `kind` (the reflecting agents deliberate by mixing that chain).
 *
 * Values are immutable; updates return new networks.
 */
class ClipNetwork {
public:
    ClipNetwork() = default;

    /* All percept -> action weights 1 (the blank-slate network). */
    static ClipNetwork two_layer(std::size_t num_percepts, std::size_t num_actions,
                                 SubchainKind kind = SubchainKind::rank_one,
                                 double subchain_gap = 0.0);

    /* Explicit h-rows; rows[p][a] = 0 marks a missing edge, else >= 1. */
    static ClipNetwork from_rows(std::vector<std::vector<double>> rows,
                                 SubchainKind kind = SubchainKind::rank_one,
                                 double subchain_gap = 0.0);

    std::size_t num_percepts() const { return m_; }
    std::size_t num_actions() const { return n_; }
    SubchainKind kind() const { return kind_; }
    double subchain_gap() const { return subchain_gap_; }

    double h(std::size_t percept, std::size_t action) const;
    const std::vector<double>& percept_row(std::size_t percept) const;

    /* Monotone counter bumped by every update; cache keys hang off it. */
    std::uint64_t version() const { return version_; }

private:
    std::size_t m_ = 0, n_ = 0;
    SubchainKind kind_ = SubchainKind::rank_one;
    double subchain_gap_ = 0.0;
    std::vector<std::vector<double>> rows_;  // rows_[p][a], 0 = no edge
    std::uint64_t version_ = 0;

    void validate() const;

    friend ClipNetwork update_h(const ClipNetwork&, const std::vector<struct Edge>&, bool,
                                const struct AgentConfig&);
};

/** @brief A percept -> action edge, named by clip roles (not labels). */
struct Edge {
    std::size_t percept = 0;
    std::size_t action = 0;
};

/**
 * @brief Per-percept flag sets f(s): the actions still considered viable.
 *
 * Every per-percept set is non-empty at all times; depleting a set resets
 * it to all actions (see flag_update).
 */
class FlagSet {
public:
    FlagSet() = default;

    /* Every action flagged for every percept (the reset state). */
    static FlagSet all(std::size_t num_percepts, std::size_t num_actions);

    std::size_t num_percepts() const { return sets_.size(); }
    std::size_t num_actions() const { return n_; }

    const ActionSet& set_for(std::size_t percept) const;
    bool is_flagged(std::size_t percept, std::size_t action) const;

    /* Replace one percept's set; rejects empty or out-of-range sets. */
    FlagSet with_set(std::size_t percept, ActionSet actions) const;

private:
    std::size_t n_ = 0;
    std::vector<ActionSet> sets_;
};

/**
 * @brief Knobs shared by every agent.
 *
 * gamma: dissipation in [0,1] (pull of h toward 1 per update);
 * lambda: reward increment, > 0;
 * k1: mixing precision exponent (classical mixing targets e^{-k1});
 * k3: deliberation retry cap for the quantum loop; both >= 1.
 */
struct AgentConfig {
    double gamma = 0.0;
    double lambda = 1.0;
    int k1 = 4;
    int k3 = 8;
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws DimensionMismatch on a bad field
};

/** @brief Result of one completed deliberation. */
struct DeliberationOutcome {
    std::size_t action = 0;
    CostLedger ledger;              // cost of this deliberation alone
    std::uint64_t samples_drawn = 0;
};

/* Marks an outcome the environment should treat as "ran out of patience":
   the action slot is meaningless and samples_drawn reflects work so far. */
constexpr std::size_t kNoAction = static_cast<std::size_t>(-1);

/**
 * @brief The percept's deliberation chain over action clips.
 *
 * Column i is action clip i's outgoing probability vector. For rank-one
 * networks every column is the normalized percept h-row (each action
 * clip's outgoing weights copy the percept row); for steered networks the
 * chain is reversible with stationary vector proportional to the h-row
 * and the network's configured spectral gap.
 *
 * @throws DanglingClip if the percept row has zero total weight.
 * @throws DimensionMismatch if the percept does not exist.
 */
StochasticMatrix transition_matrix_from_h(const ClipNetwork& net, std::size_t percept);

/**
 * @brief The rank-1 reflecting analog of the standard hopping agent.
 *
 * Always the column-constant chain on the normalized h-row, regardless of
 * the network's configured kind. Its stationary distribution equals the
 * standard agent's percept -> action law, and its spectral gap is 1.
 */
StochasticMatrix simple_rps_from_standard(const ClipNetwork& net, std::size_t percept);

/**
 * @brief One learning update.
 *
 * Every existing edge dissipates, h -> h - gamma*(h - 1); edges in
 * `traversed` additionally gain +lambda when `rewarded`. Both branches
 * map h >= 1 to h' >= 1 for gamma in [0,1]. Dissipation is global: edges
 * of other percepts decay on the same update.
 *
 * @throws DimensionMismatch if a traversed edge does not exist.
 */
ClipNetwork update_h(const ClipNetwork& net, const std::vector<Edge>& traversed, bool rewarded,
                     const AgentConfig& cfg);

/**
 * @brief Stationary distribution renormalized onto the flagged set:
 * out(i) = pi(i) / sum_{j in flagged} pi(j) on flagged indices, else 0.
 *
 * @throws ZeroFlagMass      if the flagged set carries no mass.
 * @throws DimensionMismatch on an empty or out-of-range flag set.
 */
Distribution tailed_distribution(const Distribution& pi, const ActionSet& flagged);

/**
 * @brief Flag bookkeeping after an emitted action.
 *
 * Unrewarded: the action is removed; if that empties the percept's set it
 * resets to all actions. Rewarded: unchanged.
 *
 * @throws ActionNotFlagged if the action is not currently flagged.
 */
FlagSet flag_update(const FlagSet& flags, std::size_t percept, std::size_t action,
                    bool rewarded);

/*
 * ECM wire format (JSON):
 *
 *   { "percepts": [0, 1], "actions": [2, 3, 4],
 *     "h": [[0, 2, 1.0], [0, 3, 2.5], ...],          // from, to, weight
 *     "flags": {"0": [0, 2], "1": [1]},               // action indices
 *     "subchain": "rank-one" | "steered-gap", "subchain_gap": 0.0 }
 *
 * "h" lists existing edges as (from-label, to-label, weight) triplets;
 * flag lists use action indices (0-based, not clip labels).
 */
std::string ecm_to_json(const ClipNetwork& net, const FlagSet& flags);
std::pair<ClipNetwork, FlagSet> ecm_from_json(const std::string& text);

}  // namespace reflectron
