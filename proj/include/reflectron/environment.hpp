#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "reflectron/classical_agents.hpp"
#include "reflectron/clip_network.hpp"
#include "reflectron/quantum_agent.hpp"

namespace reflectron {

/** @brief How the environment picks the next percept to present. */
enum class PerceptOrder {
    round_robin,  // 0, 1, ..., m-1, 0, ... (the default)
    uniform,      // fresh uniform draw per step from the environment rng
};

/**
 * @brief Static description of a task environment.
 *
 * reward_map[p] is the single action rewarded for percept p. A positive
 * switch_period makes the policy drift: every switch_period external
 * steps the rewarded actions are relabeled through a seeded derangement,
 * so no percept keeps (or regains) its previous rewarded action across a
 * switch. time_budget is the patience cutoff in primitive operations the
 * environment grants per decision; 0 waits forever.
 */
struct EnvironmentSpec {
    std::size_t percepts = 1;
    std::size_t actions = 2;
    std::vector<std::size_t> reward_map;  // percept -> rewarded action
    std::uint64_t switch_period = 0;      // 0 = static policy
    std::uint64_t time_budget = 0;        // 0 = unbounded patience
    std::uint64_t seed = 0;
    PerceptOrder order = PerceptOrder::round_robin;

    /* @throws DimensionMismatch on empty alphabets, a reward map that is
       not total on percepts or hits a missing action, or a positive
       switch_period with fewer than two actions (no derangement exists). */
    void validate() const;
};

/**
 * @brief Stateful environment: presents percepts, judges actions.
 *
 * All randomness (uniform percept order, policy derangements, fallback
 * actions for timed-out agents) comes from one generator seeded by
 * spec.seed, so a run is a pure function of (spec, agent behavior).
 */
class Environment {
public:
    explicit Environment(EnvironmentSpec spec);

    const EnvironmentSpec& spec() const { return spec_; }
    std::size_t current_percept() const { return percept_; }
    const std::vector<std::size_t>& reward_map() const { return map_; }
    std::uint64_t steps_taken() const { return steps_; }

    /* Judge `action` against the current percept, then advance: bump the
       step count, permute the policy if a switch is due, move to the next
       percept. Returns the binary reward. */
    int step(std::size_t action);

    /* Uniform action draw for an agent the environment cut off. */
    std::size_t random_action();

private:
    EnvironmentSpec spec_;
    std::vector<std::size_t> map_;
    std::mt19937_64 rng_;
    std::size_t percept_ = 0;
    std::uint64_t steps_ = 0;
};

/** @brief One external time step as recorded in an episode. */
struct StepRow {
    std::uint64_t step = 0;  // 0-based external step index
    std::size_t percept = 0;
    std::size_t action = 0;
    int reward = 0;  // binary
    std::uint64_t internal_ops = 0;
    bool timed_out = false;
};

/** @brief Full per-step history of one episode. */
struct EpisodeRecord {
    std::vector<StepRow> steps;

    double reward_rate() const;  // mean reward over the whole episode
    /* Mean reward over steps [from, to); clamps to the recorded range.
       @throws DimensionMismatch on an empty window. */
    double reward_rate(std::size_t from, std::size_t to) const;
};

/* CSV with header "step,percept,action,reward,internal_ops,timed_out". */
std::string episode_to_csv(const EpisodeRecord& rec);

/**
 * @brief A learning agent an environment can drive.
 *
 * deliberate() returns kNoAction when op_budget cut it off; the outcome
 * ledger then holds the work spent before the cutoff. learn() applies the
 * h-update and flag bookkeeping for an emitted (not timed-out) action.
 */
class Agent {
public:
    virtual ~Agent() = default;

    virtual std::size_t num_percepts() const = 0;
    virtual std::size_t num_actions() const = 0;

    virtual DeliberationOutcome deliberate(std::size_t percept, std::uint64_t op_budget) = 0;
    virtual void learn(std::size_t percept, std::size_t action, bool rewarded) = 0;

    virtual const ClipNetwork& network() const = 0;
    virtual const FlagSet& flags() const = 0;
};

/** @brief The standard hopping PS agent with flags. */
class StandardPsAgent : public Agent {
public:
    StandardPsAgent(ClipNetwork net, const AgentConfig& cfg);

    std::size_t num_percepts() const override { return net_.num_percepts(); }
    std::size_t num_actions() const override { return net_.num_actions(); }
    DeliberationOutcome deliberate(std::size_t percept, std::uint64_t op_budget) override;
    void learn(std::size_t percept, std::size_t action, bool rewarded) override;
    const ClipNetwork& network() const override { return net_; }
    const FlagSet& flags() const override { return flags_; }

private:
    ClipNetwork net_;
    FlagSet flags_;
    AgentConfig cfg_;
    std::mt19937_64 rng_;
};

/**
 * @brief Classical reflecting agent over the per-percept chains.
 *
 * Deliberators are rebuilt lazily whenever the network version moved
 * (every learning update invalidates them, since dissipation is global).
 */
class ClassicalRpsAgent : public Agent {
public:
    ClassicalRpsAgent(ClipNetwork net, const AgentConfig& cfg);

    std::size_t num_percepts() const override { return net_.num_percepts(); }
    std::size_t num_actions() const override { return net_.num_actions(); }
    DeliberationOutcome deliberate(std::size_t percept, std::uint64_t op_budget) override;
    void learn(std::size_t percept, std::size_t action, bool rewarded) override;
    const ClipNetwork& network() const override { return net_; }
    const FlagSet& flags() const override { return flags_; }

    const ClassicalDeliberator& deliberator(std::size_t percept);

private:
    struct Slot {
        std::uint64_t version = 0;
        std::unique_ptr<ClassicalDeliberator> impl;
    };

    ClipNetwork net_;
    FlagSet flags_;
    AgentConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<Slot> cache_;  // one slot per percept
};

/**
 * @brief Quantum reflecting agent (2-D span engine, same pricing and
 * output law as the state-vector circuit).
 */
class QuantumRpsAgent : public Agent {
public:
    QuantumRpsAgent(ClipNetwork net, const AgentConfig& cfg,
                    ReflectionMode pricing = ReflectionMode::approximate,
                    RetryMode retry = RetryMode::fresh,
                    double t_constant = kCheckCapConstant);

    std::size_t num_percepts() const override { return net_.num_percepts(); }
    std::size_t num_actions() const override { return net_.num_actions(); }
    DeliberationOutcome deliberate(std::size_t percept, std::uint64_t op_budget) override;
    void learn(std::size_t percept, std::size_t action, bool rewarded) override;
    const ClipNetwork& network() const override { return net_; }
    const FlagSet& flags() const override { return flags_; }

    const SpanDeliberator& deliberator(std::size_t percept);

private:
    struct Slot {
        std::uint64_t version = 0;
        std::unique_ptr<SpanDeliberator> impl;
    };

    ClipNetwork net_;
    FlagSet flags_;
    AgentConfig cfg_;
    ReflectionMode pricing_;
    RetryMode retry_;
    double t_constant_;
    std::mt19937_64 rng_;
    std::vector<Slot> cache_;
};

/**
 * @brief Drive `agent` through `steps` external steps of `env`.
 *
 * Per step: deliberate under the environment's time budget; a timed-out
 * agent (outcome action == kNoAction) is overruled by a uniformly random
 * action from the environment, earns no reward, and learns nothing (its
 * h-matrix and flags stay put). Otherwise the emitted action is judged
 * and the agent learns from the outcome. Deterministic per (agent seed,
 * environment seed).
 *
 * @throws DimensionMismatch if agent and environment alphabets differ.
 * Agent errors (e.g. RetryCapExceeded) propagate.
 */
EpisodeRecord run_episode(Agent& agent, Environment& env, std::uint64_t steps);

}  // namespace reflectron
