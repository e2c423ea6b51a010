#pragma once

#include <span>
#include <string>
#include <vector>

#include "netrepair/mdp.hpp"

namespace netrepair {

/// Cyclic visiting order over a machine subset.
struct PollingTour {
    std::vector<int> sequence;
    int cycle_length = 0;

    /// "{1,3}"-style 1-based label of the visited machines in tour order.
    std::string label() const;
    friend bool operator==(const PollingTour&, const PollingTour&) = default;
};

/// Sum of hop distances around the closed cycle.
int cycle_length(const NetworkLayout& layout, std::span<const int> sequence);

/// Shortest closed tour by exhaustive search. The smallest machine id is
/// fixed first; ties go to the lexicographically smallest sequence.
/// Throws std::invalid_argument for an empty subset or more than 8 machines.
PollingTour best_tour(const NetworkLayout& layout, std::vector<int> subset);

/// Exhaustive service along a fixed cycle. `progress` is the position in
/// the tour of the machine currently targeted and is advanced in place.
Action polling_decision(const NetworkLayout& layout, const PollingTour& tour, const SystemState& x,
                        std::size_t& progress);

class PollingPolicy : public Policy {
public:
    PollingPolicy(const InstanceParameters& inst, PollingTour tour);

    Action decide(const SystemState& x) override;
    void reset() override { progress_ = 0; }
    std::string name() const override { return "polling" + tour_.label(); }
    const PollingTour& tour() const { return tour_; }
    std::size_t progress() const { return progress_; }

private:
    const InstanceParameters* inst_;
    PollingTour tour_;
    std::size_t progress_ = 0;
};

struct PollingSubsetResult {
    PollingTour tour;
    SimulationReport report;
};

struct PollingResult {
    std::size_t best = 0;  // position in `subsets`
    std::vector<PollingSubsetResult> subsets;

    const SimulationReport& best_report() const { return subsets[best].report; }
    const PollingTour& best_tour() const { return subsets[best].tour; }
    /// One row per subset: subset,cycle_length,average_cost,average_reward.
    std::string csv() const;
};

inline constexpr int kDefaultPollingMachineLimit = 4;

/// Simulates the best tour of every non-empty machine subset on the same
/// common random numbers and keeps the one with the lowest average cost.
/// Throws std::invalid_argument when m exceeds `machine_limit`.
PollingResult best_polling_report(const InstanceParameters& inst, const SystemState& x0,
                                  std::uint64_t steps, std::span<const double> crn,
                                  int machine_limit = kDefaultPollingMachineLimit);

}  // namespace netrepair
