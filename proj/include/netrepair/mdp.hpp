#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrepair/instance.hpp"
#include "netrepair/rng.hpp"

namespace netrepair {

/// Repairer location plus every machine's degradation level.
struct SystemState {
    NodeId location = 0;
    std::vector<int> conditions;

    friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Target node: the current location means "remain", a neighbour means "move".
using Action = NodeId;

/// (1, (0, ..., 0)) in 1-based terms: machine 1, everything pristine.
SystemState initial_state(const InstanceParameters& inst);
/// Every machine at its cap, repairer at `location`.
SystemState all_failed_state(const InstanceParameters& inst, NodeId location = 0);
std::string describe(const SystemState& x);

bool is_admissible(const InstanceParameters& inst, const SystemState& x, Action a);
/// {location} followed by the neighbours in increasing id order.
std::vector<Action> admissible_actions(const InstanceParameters& inst, const SystemState& x);

enum class EventKind { Degrade, Repair, SwitchArrive, SelfLoop };

struct TransitionEvent {
    EventKind kind = EventKind::SelfLoop;
    NodeId target = -1;  // machine for Degrade/Repair, node for SwitchArrive
    double probability = 0.0;
};

/// Raised when a state space exceeds the configured enumeration bound.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mixed-radix state index: location major, then x_1 .. x_m (x_m fastest).
/// This is the lexicographic order used for DP tables.
class StateCodec {
public:
    explicit StateCodec(const InstanceParameters& inst);

    std::uint64_t encode(const SystemState& x) const;
    SystemState decode(std::uint64_t index) const;

    std::uint64_t size() const { return size_; }
    std::uint64_t conditions_count() const { return per_location_; }
    std::uint64_t stride(int machine) const { return strides_[machine]; }
    NodeId location_of(std::uint64_t index) const { return static_cast<NodeId>(index / per_location_); }
    int condition_of(std::uint64_t index, int machine) const {
        return static_cast<int>((index % per_location_) / strides_[machine] % (caps_[machine] + 1));
    }
    std::uint64_t relocate(std::uint64_t index, NodeId to) const {
        return static_cast<std::uint64_t>(to) * per_location_ + index % per_location_;
    }

private:
    std::vector<int> caps_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t per_location_ = 1;
    std::uint64_t size_ = 0;
};

inline constexpr std::uint64_t kDefaultStateBound = 5'000'000;

/// All states in codec order; throws CapacityError above `bound`.
std::vector<SystemState> enumerate_states(const InstanceParameters& inst,
                                          std::uint64_t bound = kDefaultStateBound);

/// The discrete-time chain obtained by uniformization with step 1/Lambda.
///
/// A single uniform u drives each step. [0, 1) is cut into fixed slots:
/// machine j's degradation slot (width lambda_j/Lambda, in machine order, kept
/// even when j is at its cap, where it maps to a self-loop), then the repair or
/// switch slot for the chosen action, then the self-loop remainder. Fixed slot
/// positions make degradations coincide across policies under common random
/// numbers whenever the same machines are degradable.
class UniformizedChain {
public:
    explicit UniformizedChain(const InstanceParameters& inst);

    const InstanceParameters& instance() const { return *inst_; }
    double rate() const { return rate_; }
    double delta() const { return 1.0 / rate_; }
    double degrade_probability(int j) const { return degrade_[j]; }
    double repair_probability(int j) const { return repair_[j]; }
    double switch_probability() const { return switch_; }

    /// Eq.-(1) kernel as events; probabilities sum to 1, self-loop takes the residual.
    std::vector<TransitionEvent> transitions(const SystemState& x, Action a) const;

    /// Applies one step in place and returns what happened.
    EventKind advance(SystemState& x, Action a, double u) const;

    double cost(const SystemState& x) const;
    double reward(const SystemState& x, Action a) const;

private:
    const InstanceParameters* inst_;
    double rate_ = 1.0;
    std::vector<double> degrade_;
    std::vector<double> degrade_end_;  // cumulative slot ends
    std::vector<double> repair_;
    double switch_ = 0.0;
};

std::vector<TransitionEvent> step_probabilities(const InstanceParameters& inst, const SystemState& x,
                                                Action a);
/// c(x) = sum_i f_i(x_i).
double step_cost(const InstanceParameters& inst, const SystemState& x);
/// (mu_i/lambda_i)[f_i(K_i) - f_i(x_i - 1)] when repairing at a damaged machine, else 0.
double step_reward(const InstanceParameters& inst, const SystemState& x, Action a);

/// Decision rule driven by simulate(). Implementations may keep internal state
/// (polling tours do); reset() is called at the start of every run.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action decide(const SystemState& x) = 0;
    virtual void reset() {}
    virtual std::string name() const = 0;
};

struct SimulationReport {
    std::string policy;
    std::uint64_t steps = 0;
    double total_cost = 0.0;
    double total_reward = 0.0;
    double average_cost = 0.0;    // g
    double average_reward = 0.0;  // u
    std::vector<std::uint64_t> visits;  // steps spent at each node
    std::uint64_t safe_actions = 0;     // OPI only: base-policy fallbacks

    double safe_fraction() const { return steps ? static_cast<double>(safe_actions) / steps : 0.0; }
    std::string to_json() const;
};

/// Runs `steps` uniformized steps from x0, consuming uniforms[0..steps).
/// Cost and reward accrue for the state occupied at the start of each step.
SimulationReport simulate(const InstanceParameters& inst, Policy& policy, const SystemState& x0,
                          std::uint64_t steps, std::span<const double> uniforms);
SimulationReport simulate(const InstanceParameters& inst, Policy& policy, const SystemState& x0,
                          std::uint64_t steps, Rng& rng);

/// Fixed lookup table over StateCodec indices.
class StationaryPolicy : public Policy {
public:
    StationaryPolicy() = default;
    StationaryPolicy(const InstanceParameters& inst, std::vector<Action> actions,
                     std::string name = "stationary");

    Action decide(const SystemState& x) override { return actions_[codec_.encode(x)]; }
    std::string name() const override { return name_; }

    Action at(std::uint64_t index) const { return actions_[index]; }
    const std::vector<Action>& actions() const { return actions_; }
    const StateCodec& codec() const { return codec_; }

    friend bool operator==(const StationaryPolicy& x, const StationaryPolicy& y) {
        return x.actions_ == y.actions_;
    }

private:
    StateCodec codec_{InstanceParameters{}};
    std::vector<Action> actions_;
    std::string name_;
};

/// Evaluates a memoryless rule at every state (reset before each query).
StationaryPolicy tabulate(const InstanceParameters& inst, Policy& rule,
                          std::uint64_t bound = kDefaultStateBound);

/// Never moves; repairs only where it already stands.
class PassivePolicy : public Policy {
public:
    Action decide(const SystemState& x) override { return x.location; }
    std::string name() const override { return "passive"; }
};

}  // namespace netrepair
