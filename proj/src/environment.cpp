#include "reflectron/environment.hpp"

#include <sstream>
#include <utility>

#include "reflectron/errors.hpp"
#include "reflectron/rng.hpp"

namespace reflectron {

void EnvironmentSpec::validate() const {
    if (percepts == 0 || actions == 0)
        throw DimensionMismatch("EnvironmentSpec: empty percept or action alphabet");
    if (reward_map.size() != percepts)
        throw DimensionMismatch("EnvironmentSpec: reward map must be total on percepts");
    for (std::size_t a : reward_map)
        if (a >= actions) throw DimensionMismatch("EnvironmentSpec: reward map hits a missing action");
    if (switch_period > 0 && actions < 2)
        throw DimensionMismatch("EnvironmentSpec: policy switching needs at least two actions");
}

Environment::Environment(EnvironmentSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
    spec_.validate();
    map_ = spec_.reward_map;
    percept_ = spec_.order == PerceptOrder::uniform
                   ? static_cast<std::size_t>(uniform_index(rng_, spec_.percepts))
                   : 0;
}

int Environment::step(std::size_t action) {
    if (action >= spec_.actions) throw DimensionMismatch("Environment::step: action out of range");
    const int reward = action == map_[percept_] ? 1 : 0;
    ++steps_;
    if (spec_.switch_period > 0 && steps_ % spec_.switch_period == 0) {
        // Relabel rewarded actions through a derangement: no percept keeps
        // or regains its previous rewarded action across this switch.
        const std::vector<int> sigma = random_derangement(rng_, static_cast<int>(spec_.actions));
        for (std::size_t p = 0; p < spec_.percepts; ++p)
            map_[p] = static_cast<std::size_t>(sigma[map_[p]]);
    }
    percept_ = spec_.order == PerceptOrder::uniform
                   ? static_cast<std::size_t>(uniform_index(rng_, spec_.percepts))
                   : static_cast<std::size_t>(steps_ % spec_.percepts);
    return reward;
}

std::size_t Environment::random_action() {
    return static_cast<std::size_t>(uniform_index(rng_, spec_.actions));
}

double EpisodeRecord::reward_rate() const { return reward_rate(0, steps.size()); }

double EpisodeRecord::reward_rate(std::size_t from, std::size_t to) const {
    to = std::min(to, steps.size());
    if (from >= to) throw DimensionMismatch("EpisodeRecord::reward_rate: empty step window");
    std::uint64_t total = 0;
    for (std::size_t i = from; i < to; ++i) total += static_cast<std::uint64_t>(steps[i].reward);
    return static_cast<double>(total) / static_cast<double>(to - from);
}

std::string episode_to_csv(const EpisodeRecord& rec) {
    std::ostringstream os;
    os << "step,percept,action,reward,internal_ops,timed_out\n";
    for (const StepRow& r : rec.steps) {
        os << r.step << ',' << r.percept << ',' << r.action << ',' << r.reward << ','
           << r.internal_ops << ',' << (r.timed_out ? 1 : 0) << '\n';
    }
    return os.str();
}

StandardPsAgent::StandardPsAgent(ClipNetwork net, const AgentConfig& cfg)
    : net_(std::move(net)), cfg_(cfg), rng_(cfg.rng_seed) {
    cfg_.validate();
    flags_ = FlagSet::all(net_.num_percepts(), net_.num_actions());
}

DeliberationOutcome StandardPsAgent::deliberate(std::size_t percept, std::uint64_t op_budget) {
    return standard_ps_deliberate(net_, percept, flags_, rng_, nullptr, op_budget);
}

void StandardPsAgent::learn(std::size_t percept, std::size_t action, bool rewarded) {
    net_ = update_h(net_, {Edge{percept, action}}, rewarded, cfg_);
    flags_ = flag_update(flags_, percept, action, rewarded);
}

ClassicalRpsAgent::ClassicalRpsAgent(ClipNetwork net, const AgentConfig& cfg)
    : net_(std::move(net)), cfg_(cfg), rng_(cfg.rng_seed) {
    cfg_.validate();
    flags_ = FlagSet::all(net_.num_percepts(), net_.num_actions());
    cache_.resize(net_.num_percepts());
}

const ClassicalDeliberator& ClassicalRpsAgent::deliberator(std::size_t percept) {
    if (percept >= cache_.size())
        throw DimensionMismatch("ClassicalRpsAgent: percept out of range");
    Slot& slot = cache_[percept];
    if (!slot.impl || slot.version != net_.version()) {
        slot.impl =
            std::make_unique<ClassicalDeliberator>(transition_matrix_from_h(net_, percept), cfg_);
        slot.version = net_.version();
    }
    return *slot.impl;
}

DeliberationOutcome ClassicalRpsAgent::deliberate(std::size_t percept, std::uint64_t op_budget) {
    const ClassicalDeliberator& d = deliberator(percept);
    return d.deliberate(flags_.set_for(percept), rng_, nullptr, op_budget);
}

void ClassicalRpsAgent::learn(std::size_t percept, std::size_t action, bool rewarded) {
    net_ = update_h(net_, {Edge{percept, action}}, rewarded, cfg_);
    flags_ = flag_update(flags_, percept, action, rewarded);
}

QuantumRpsAgent::QuantumRpsAgent(ClipNetwork net, const AgentConfig& cfg, ReflectionMode pricing,
                                 RetryMode retry, double t_constant)
    : net_(std::move(net)),
      cfg_(cfg),
      pricing_(pricing),
      retry_(retry),
      t_constant_(t_constant),
      rng_(cfg.rng_seed) {
    cfg_.validate();
    flags_ = FlagSet::all(net_.num_percepts(), net_.num_actions());
    cache_.resize(net_.num_percepts());
}

const SpanDeliberator& QuantumRpsAgent::deliberator(std::size_t percept) {
    if (percept >= cache_.size()) throw DimensionMismatch("QuantumRpsAgent: percept out of range");
    Slot& slot = cache_[percept];
    if (!slot.impl || slot.version != net_.version()) {
        slot.impl = std::make_unique<SpanDeliberator>(transition_matrix_from_h(net_, percept),
                                                      cfg_, pricing_, retry_, t_constant_);
        slot.version = net_.version();
    }
    return *slot.impl;
}

DeliberationOutcome QuantumRpsAgent::deliberate(std::size_t percept, std::uint64_t op_budget) {
    const SpanDeliberator& d = deliberator(percept);
    return d.deliberate(flags_.set_for(percept), rng_, nullptr, op_budget);
}

void QuantumRpsAgent::learn(std::size_t percept, std::size_t action, bool rewarded) {
    net_ = update_h(net_, {Edge{percept, action}}, rewarded, cfg_);
    flags_ = flag_update(flags_, percept, action, rewarded);
}

EpisodeRecord run_episode(Agent& agent, Environment& env, std::uint64_t steps) {
    if (agent.num_percepts() != env.spec().percepts || agent.num_actions() != env.spec().actions)
        throw DimensionMismatch("run_episode: agent and environment alphabets differ");

    EpisodeRecord rec;
    rec.steps.reserve(steps);
    for (std::uint64_t i = 0; i < steps; ++i) {
        const std::size_t percept = env.current_percept();
        const DeliberationOutcome out = agent.deliberate(percept, env.spec().time_budget);
        const bool timed_out = out.action == kNoAction;

        // A timed-out agent is overruled by a random action and earns
        // nothing; it learns nothing either (no edge was traversed by a
        // completed deliberation, so h and flags stay put).
        const std::size_t action = timed_out ? env.random_action() : out.action;
        const int judged = env.step(action);
        const int reward = timed_out ? 0 : judged;
        if (!timed_out) agent.learn(percept, action, reward == 1);

        StepRow row;
        row.step = i;
        row.percept = percept;
        row.action = action;
        row.reward = reward;
        row.internal_ops = primitive_ops(out.ledger);
        row.timed_out = timed_out;
        rec.steps.push_back(row);
    }
    return rec;
}

}  // namespace reflectron
