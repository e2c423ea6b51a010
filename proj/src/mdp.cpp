#include "netrepair/mdp.hpp"

#include <sstream>

#include "json.hpp"

namespace netrepair {

SystemState initial_state(const InstanceParameters& inst) {
    return SystemState{0, std::vector<int>(static_cast<std::size_t>(inst.machine_count()), 0)};
}

SystemState all_failed_state(const InstanceParameters& inst, NodeId location) {
    return SystemState{location, inst.cap};
}

std::string describe(const SystemState& x) {
    std::ostringstream out;
    out << '(' << x.location + 1 << ",(";
    for (std::size_t j = 0; j < x.conditions.size(); ++j) {
        out << (j ? "," : "") << x.conditions[j];
    }
    out << "))";
    return out.str();
}

bool is_admissible(const InstanceParameters& inst, const SystemState& x, Action a) {
    return a == x.location || inst.layout.adjacent(x.location, a);
}

std::vector<Action> admissible_actions(const InstanceParameters& inst, const SystemState& x) {
    std::vector<Action> out{x.location};
    for (NodeId v : inst.layout.neighbors(x.location)) {
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------

StateCodec::StateCodec(const InstanceParameters& inst) : caps_(inst.cap) {
    const auto m = caps_.size();
    strides_.assign(m, 1);
    for (std::size_t j = m; j-- > 0;) {
        strides_[j] = per_location_;
        per_location_ *= static_cast<std::uint64_t>(caps_[j] + 1);
    }
    size_ = per_location_ * static_cast<std::uint64_t>(inst.layout.node_count());
}

std::uint64_t StateCodec::encode(const SystemState& x) const {
    std::uint64_t index = static_cast<std::uint64_t>(x.location) * per_location_;
    for (std::size_t j = 0; j < caps_.size(); ++j) {
        index += static_cast<std::uint64_t>(x.conditions[j]) * strides_[j];
    }
    return index;
}

SystemState StateCodec::decode(std::uint64_t index) const {
    SystemState x;
    x.location = location_of(index);
    x.conditions.resize(caps_.size());
    for (std::size_t j = 0; j < caps_.size(); ++j) {
        x.conditions[j] = condition_of(index, static_cast<int>(j));
    }
    return x;
}

std::vector<SystemState> enumerate_states(const InstanceParameters& inst, std::uint64_t bound) {
    const StateCodec codec(inst);
    if (codec.size() > bound) {
        throw CapacityError("state space has " + std::to_string(codec.size()) +
                            " states, above the bound of " + std::to_string(bound));
    }
    std::vector<SystemState> states;
    states.reserve(codec.size());
    for (std::uint64_t k = 0; k < codec.size(); ++k) {
        states.push_back(codec.decode(k));
    }
    return states;
}

// ---------------------------------------------------------------------------

UniformizedChain::UniformizedChain(const InstanceParameters& inst)
    : inst_(&inst), rate_(inst.uniformization_rate()) {
    const int m = inst.machine_count();
    double edge = 0.0;
    for (int j = 0; j < m; ++j) {
        degrade_.push_back(inst.lambda[j] / rate_);
        repair_.push_back(inst.mu[j] / rate_);
        edge += degrade_.back();
        degrade_end_.push_back(edge);
    }
    switch_ = inst.tau / rate_;
}

std::vector<TransitionEvent> UniformizedChain::transitions(const SystemState& x, Action a) const {
    const auto& inst = *inst_;
    if (!is_admissible(inst, x, a)) {
        throw std::invalid_argument("action " + std::to_string(a + 1) + " not available at " +
                                    describe(x));
    }
    std::vector<TransitionEvent> events;
    double used = 0.0;
    for (int j = 0; j < inst.machine_count(); ++j) {
        if (x.conditions[j] < inst.cap[j]) {
            events.push_back({EventKind::Degrade, j, degrade_[j]});
            used += degrade_[j];
        }
    }
    if (a == x.location) {
        if (inst.layout.is_machine(a) && x.conditions[a] >= 1) {
            events.push_back({EventKind::Repair, a, repair_[a]});
            used += repair_[a];
        }
    } else {
        events.push_back({EventKind::SwitchArrive, a, switch_});
        used += switch_;
    }
    events.push_back({EventKind::SelfLoop, x.location, 1.0 - used});
    return events;
}

EventKind UniformizedChain::advance(SystemState& x, Action a, double u) const {
    const auto& inst = *inst_;
    const int m = inst.machine_count();
    if (u < degrade_end_[m - 1]) {
        for (int j = 0; j < m; ++j) {
            if (u < degrade_end_[j]) {
                if (x.conditions[j] < inst.cap[j]) {
                    ++x.conditions[j];
                    return EventKind::Degrade;
                }
                return EventKind::SelfLoop;
            }
        }
    }
    const double slot = u - degrade_end_[m - 1];
    if (a == x.location) {
        if (inst.layout.is_machine(a) && x.conditions[a] >= 1 && slot < repair_[a]) {
            --x.conditions[a];
            return EventKind::Repair;
        }
        return EventKind::SelfLoop;
    }
    if (slot < switch_) {
        x.location = a;
        return EventKind::SwitchArrive;
    }
    return EventKind::SelfLoop;
}

double UniformizedChain::cost(const SystemState& x) const {
    double total = 0.0;
    for (int j = 0; j < inst_->machine_count(); ++j) {
        total += inst_->cost_rate(j, x.conditions[j]);
    }
    return total;
}

double UniformizedChain::reward(const SystemState& x, Action a) const {
    const auto& inst = *inst_;
    const NodeId i = x.location;
    if (a != i || !inst.layout.is_machine(i) || x.conditions[i] < 1) {
        return 0.0;
    }
    return inst.mu[i] / inst.lambda[i] *
           (inst.cost_rate(i, inst.cap[i]) - inst.cost_rate(i, x.conditions[i] - 1));
}

std::vector<TransitionEvent> step_probabilities(const InstanceParameters& inst, const SystemState& x,
                                                Action a) {
    return UniformizedChain(inst).transitions(x, a);
}

double step_cost(const InstanceParameters& inst, const SystemState& x) {
    return UniformizedChain(inst).cost(x);
}

double step_reward(const InstanceParameters& inst, const SystemState& x, Action a) {
    if (!is_admissible(inst, x, a)) {
        throw std::invalid_argument("action " + std::to_string(a + 1) + " not available at " +
                                    describe(x));
    }
    return UniformizedChain(inst).reward(x, a);
}

// ---------------------------------------------------------------------------

std::string SimulationReport::to_json() const {
    nlohmann::json doc;
    doc["policy"] = policy;
    doc["steps"] = steps;
    doc["total_cost"] = total_cost;
    doc["total_reward"] = total_reward;
    doc["average_cost"] = average_cost;
    doc["average_reward"] = average_reward;
    doc["visits"] = visits;
    doc["safe_actions"] = safe_actions;
    doc["safe_fraction"] = safe_fraction();
    return doc.dump(2);
}

namespace {

template <class NextUniform>
SimulationReport run(const InstanceParameters& inst, Policy& policy, const SystemState& x0,
                     std::uint64_t steps, NextUniform&& next_uniform) {
    if (steps == 0) {
        throw std::invalid_argument("simulate: steps must be >= 1");
    }
    const UniformizedChain chain(inst);
    SimulationReport report;
    report.policy = policy.name();
    report.steps = steps;
    report.visits.assign(static_cast<std::size_t>(inst.layout.node_count()), 0);
    policy.reset();
    SystemState x = x0;
    for (std::uint64_t t = 0; t < steps; ++t) {
        const Action a = policy.decide(x);
        if (!is_admissible(inst, x, a)) {
            throw std::logic_error(policy.name() + " chose an unavailable action at " + describe(x));
        }
        report.total_cost += chain.cost(x);
        report.total_reward += chain.reward(x, a);
        ++report.visits[x.location];
        chain.advance(x, a, next_uniform(t));
    }
    report.average_cost = report.total_cost / static_cast<double>(steps);
    report.average_reward = report.total_reward / static_cast<double>(steps);
    return report;
}

}  // namespace

SimulationReport simulate(const InstanceParameters& inst, Policy& policy, const SystemState& x0,
                          std::uint64_t steps, std::span<const double> uniforms) {
    if (uniforms.size() < steps) {
        throw std::invalid_argument("simulate: common random number list has " +
                                    std::to_string(uniforms.size()) + " entries, need " +
                                    std::to_string(steps));
    }
    return run(inst, policy, x0, steps, [&](std::uint64_t t) { return uniforms[t]; });
}

SimulationReport simulate(const InstanceParameters& inst, Policy& policy, const SystemState& x0,
                          std::uint64_t steps, Rng& rng) {
    return run(inst, policy, x0, steps, [&](std::uint64_t) { return rng.uniform(); });
}

// ---------------------------------------------------------------------------

StationaryPolicy::StationaryPolicy(const InstanceParameters& inst, std::vector<Action> actions,
                                   std::string name)
    : codec_(inst), actions_(std::move(actions)), name_(std::move(name)) {
    if (actions_.size() != codec_.size()) {
        throw std::invalid_argument("stationary policy: table size does not match the state space");
    }
    for (std::uint64_t k = 0; k < codec_.size(); ++k) {
        const NodeId here = codec_.location_of(k);
        if (actions_[k] != here && !inst.layout.adjacent(here, actions_[k])) {
            throw std::invalid_argument("stationary policy: inadmissible action at " +
                                        describe(codec_.decode(k)));
        }
    }
}

StationaryPolicy tabulate(const InstanceParameters& inst, Policy& rule, std::uint64_t bound) {
    const StateCodec codec(inst);
    if (codec.size() > bound) {
        throw CapacityError("state space has " + std::to_string(codec.size()) +
                            " states, above the bound of " + std::to_string(bound));
    }
    std::vector<Action> actions(codec.size());
    for (std::uint64_t k = 0; k < codec.size(); ++k) {
        rule.reset();
        actions[k] = rule.decide(codec.decode(k));
    }
    return StationaryPolicy(inst, std::move(actions), rule.name());
}

}  // namespace netrepair
