#pragma once

#include <string>
#include <vector>

#include "netrepair/mdp.hpp"

namespace netrepair {

/// Expected reward and duration of an uninterrupted repair of one machine,
/// indexed by the starting level k = 0..K (both zero at k = 0).
struct RepairStatistics {
    std::vector<double> expected_reward;
    std::vector<double> expected_time;
};

/// Solves the tri-diagonal first-step equations
///   R(k) = s(k)/(l+m) + l/(l+m) R(k+1) + m/(l+m) R(k-1),  k < K
///   R(K) = s(K)/m + R(K-1)
/// with s(k) = mu [f(K) - f(k-1)] / lambda (and s = 1 for the time).
RepairStatistics repair_statistics(const InstanceParameters& inst, int machine);
/// The same quantities from the explicit coefficient sums
///   R(k) = sum_p C_p(k) s(p),  T(k) = sum_p C_p(k).
RepairStatistics repair_statistics_closed_form(const InstanceParameters& inst, int machine);

/// Level X of machine j when a repairer that leaves now arrives after d
/// switches, together with the expected travel time given each level.
/// Entries are indexed k - first for k = first..cap.
struct ArrivalDistribution {
    int first = 0;
    int cap = 0;
    std::vector<double> pmf;
    std::vector<double> expected_travel;

    double probability(int k) const { return pmf[k - first]; }
    double travel(int k) const { return expected_travel[k - first]; }
};

/// Throws std::invalid_argument if d < 1 or x is outside 0..cap.
ArrivalDistribution arrival_distribution(double lambda, double tau, int d, int x, int cap);
/// Throws std::invalid_argument if from == to.
ArrivalDistribution arrival_distribution(const InstanceParameters& inst, NodeId from, int to,
                                         int x_to);

double stay_index(const InstanceParameters& inst, int machine, int x);
double move_index(const InstanceParameters& inst, NodeId from, int to, int x_to);
double wait_index(const InstanceParameters& inst, NodeId from, int to, int x_to);
/// Expected travel time from `node` to whichever machine degrades next.
double idle_score(const InstanceParameters& inst, NodeId node);

/// Every index the heuristic can consult, tabulated once per instance.
/// Move and wait indices depend on the origin only through the distance.
class IndexTables {
public:
    explicit IndexTables(const InstanceParameters& inst);

    const InstanceParameters& instance() const { return *inst_; }
    double stay(int machine, int x) const { return stay_[machine][x]; }
    double move(NodeId from, int to, int x) const;
    double wait(NodeId from, int to, int x) const;
    double idle(NodeId node) const { return idle_[node]; }
    const RepairStatistics& statistics(int machine) const { return stats_[machine]; }

    /// Node minimizing the idle score (smallest id among ties).
    NodeId idle_position() const { return idle_position_; }
    /// Smallest-id machine maximizing E[R(K)]/E[T(K)].
    int all_failed_target() const { return all_failed_target_; }

private:
    const InstanceParameters* inst_;
    std::vector<RepairStatistics> stats_;
    std::vector<std::vector<double>> stay_;
    // [machine][distance][x]
    std::vector<std::vector<std::vector<double>>> move_;
    std::vector<std::vector<std::vector<double>>> wait_;
    std::vector<double> idle_;
    NodeId idle_position_ = 0;
    int all_failed_target_ = 0;
};

/// a >= b up to a relative tolerance of 1e-12.
bool index_at_least(double a, double b);

Action index_decision(const IndexTables& tables, const SystemState& x);
/// As index_decision, except that with every machine failed the repairer
/// heads for IndexTables::all_failed_target().
Action modified_index_decision(const IndexTables& tables, const SystemState& x);

Action index_decision(const InstanceParameters& inst, const SystemState& x);
Action modified_index_decision(const InstanceParameters& inst, const SystemState& x);

class IndexPolicy : public Policy {
public:
    IndexPolicy(const InstanceParameters& inst, bool modified);

    Action decide(const SystemState& x) override;
    std::string name() const override { return modified_ ? "modified-index" : "index"; }
    const IndexTables& tables() const { return tables_; }

private:
    IndexTables tables_;
    bool modified_;
};

/// JSON dump of every index consulted at state x (for tracing decisions).
std::string index_table_json(const InstanceParameters& inst, const SystemState& x);

}  // namespace netrepair
