#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "netrepair/mdp.hpp"
#include "netrepair/rng.hpp"

namespace netrepair {

/// Exponentially weighted statistics of the relative-value observations of
/// one state: mean h, second moment SS, sum of squared weights W, count s.
struct ValueStoreEntry {
    double h = 0.0;
    double ss = 0.0;
    double w = 0.0;
    std::uint64_t s = 0;

    friend bool operator==(const ValueStoreEntry&, const ValueStoreEntry&) = default;
};

/// Learning rate of the s-th observation: 10 / (10 + s - 1).
double learning_rate(std::uint64_t s);

/// Applies the s+1-th observation in place.
void observe(ValueStoreEntry& entry, double observation);

/// The array of value estimates, keyed by StateCodec index. The reference
/// state starts at (0, 0, 1, 1) and may be updated like any other entry.
class ValueStore {
public:
    ValueStore(const InstanceParameters& inst, SystemState reference, double g_base);

    const StateCodec& codec() const { return codec_; }
    const SystemState& reference() const { return reference_; }
    std::uint64_t reference_key() const { return reference_key_; }
    double g_base() const { return g_base_; }

    bool contains(std::uint64_t key) const { return entries_.contains(key); }
    bool contains(const SystemState& x) const { return contains(codec_.encode(x)); }
    const ValueStoreEntry* find(std::uint64_t key) const;
    const ValueStoreEntry* find(const SystemState& x) const { return find(codec_.encode(x)); }
    /// Creates a (0, 0, 0, 0) entry when missing.
    ValueStoreEntry& entry(std::uint64_t key) { return entries_[key]; }
    std::size_t size() const { return entries_.size(); }

    /// Entries sorted by key, for deterministic traversal and export.
    std::vector<std::pair<std::uint64_t, ValueStoreEntry>> sorted() const;

    std::string to_json() const;
    static ValueStore from_json(const InstanceParameters& inst, const std::string& text);

    friend bool operator==(const ValueStore& a, const ValueStore& b) {
        return a.reference_ == b.reference_ && a.g_base_ == b.g_base_ && a.entries_ == b.entries_;
    }

private:
    StateCodec codec_;
    SystemState reference_;
    std::uint64_t reference_key_ = 0;
    double g_base_ = 0.0;
    std::unordered_map<std::uint64_t, ValueStoreEntry> entries_;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool bounded() const;
    bool contains(double v) const { return lo <= v && v <= hi; }
};

/// h +- 1.96 sqrt((SS - h^2) / (1 - W) * W). Unbounded when s < 2, when
/// W >= 1 - 1e-12, or when SS - h^2 is negative beyond rounding noise.
Interval confidence_interval(const ValueStoreEntry& entry);

inline constexpr double kNormalQuantile975 = 1.96;

enum class BudgetMode { WallClock, StepCount };

/// Simulation budgets. In WallClock mode tau_max_seconds bounds the offline
/// time per start state and delta_seconds the nested sampling per decision.
/// In StepCount mode these become tau_max_steps simulated steps per start
/// state and nested_rounds sweeps of F(x') per decision, which makes runs
/// bit-reproducible.
struct OpiBudget {
    BudgetMode mode = BudgetMode::StepCount;
    std::uint64_t r1 = 10'000;
    std::uint64_t r2 = 100'000;
    std::uint64_t r_off = 2'000;
    double tau_max_seconds = 100.0;
    std::uint64_t tau_max_steps = 200'000;
    std::uint64_t r_on = 50'000;
    double delta_seconds = 0.01;
    std::uint64_t nested_rounds = 1;
    /// A single trajectory longer than this is reported as an error.
    std::uint64_t max_trajectory_steps = 100'000'000;

    /// Values used in the published study (wall-clock gated).
    static OpiBudget paper_scale();
    /// Reduced budgets for desk-scale runs and tests (step-count gated).
    static OpiBudget desk_scale();
    void validate() const;
};

struct TrajectoryRecord {
    SystemState state;
    double cost = 0.0;
    std::uint64_t steps = 0;
};

struct TrajectoryResult {
    SystemState stopping_state;
    double total_cost = 0.0;
    std::uint64_t total_steps = 0;
    std::vector<TrajectoryRecord> visited_prefix;
    double seconds = 0.0;
};

/// Simulates the base policy from z until it reaches a stored state other
/// than z (or the reference), then updates the first p distinct states.
TrajectoryResult sample_trajectory(const InstanceParameters& inst, Policy& base, ValueStore& store,
                                   const SystemState& z, std::size_t p, Rng& rng,
                                   std::uint64_t max_steps = 100'000'000);

struct PreparatoryResult {
    double g_base = 0.0;
    SystemState reference;
    std::vector<SystemState> core;            // reference first
    std::vector<SystemState> representative;  // core states and their neighbours
    int busiest_machine = 0;
};

PreparatoryResult offline_preparatory(const InstanceParameters& inst, Policy& base,
                                      const OpiBudget& budget, Rng& rng);

ValueStore offline_main(const InstanceParameters& inst, Policy& base, const PreparatoryResult& prep,
                        const OpiBudget& budget, Rng& rng);

/// F(x): x itself, x relocated to each neighbour, and x with the current
/// machine repaired one level (when x_i >= 1), in that order.
std::vector<SystemState> neighbourhood(const InstanceParameters& inst, const SystemState& x);

/// True when r1 h(y1) - r2 h(y2) + (r2 - r1) h(x) < 0 at every point of the
/// interval box. Terms with zero coefficient are dropped; a needed unbounded
/// endpoint makes the comparison fail.
bool certainly_better(double r1, const Interval& y1, double r2, const Interval& y2,
                      const Interval& x);

struct ActionChoice {
    Action action = 0;
    bool safe = false;  // true when the base action was used as a fallback
};

ActionChoice improving_action(const InstanceParameters& inst, const SystemState& x,
                              const ValueStore& store, Policy& base);

struct OnlineResult {
    SimulationReport report;
    std::array<double, 4> safe_quartile_fraction{};
    std::uint64_t nested_trajectories = 0;
};

/// Runs budget.r_on decisions from x0. Real transitions consume crn[0..r_on);
/// nested sampling draws from `nested`.
OnlineResult online_run(const InstanceParameters& inst, Policy& base, ValueStore& store,
                        const OpiBudget& budget, const SystemState& x0,
                        std::span<const double> crn, Rng& nested);

struct OpiResult {
    PreparatoryResult preparatory;
    ValueStore store;
    OnlineResult online;
};

/// Offline preparatory and main phases followed by the online run, with the
/// modified index policy as the base and random streams derived from `seed`.
OpiResult run_opi(const InstanceParameters& inst, const OpiBudget& budget, std::uint64_t seed,
                  const SystemState& x0, std::span<const double> crn);

}  // namespace netrepair
