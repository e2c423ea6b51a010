#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrepair/mdp.hpp"

namespace netrepair {

/// How a fixed policy's average cost and relative values are computed.
///   SuccessiveApproximation: Jacobi sweeps v+ = c + P v until g settles.
///   Direct: sparse LU solve of g + v = c + P v with v(reference) = 0
///           (requires a unichain policy).
///   Automatic: successive approximation, falling back to the direct solve
///              if the sweeps do not settle.
enum class EvaluationMethod { Automatic, SuccessiveApproximation, Direct };

struct DpOptions {
    double tol = 1e-9;
    std::uint64_t max_sweeps = 10'000'000;
    std::uint64_t max_states = kDefaultStateBound;
    EvaluationMethod method = EvaluationMethod::Automatic;
    int max_iterations = 1'000;
};

/// Evaluation did not settle within max_sweeps (typically a multichain policy
/// whose gain is not yet stationary) or the direct system was singular.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PolicyEvaluation {
    double g = 0.0;              // average cost from the reference state
    double u = 0.0;              // average reward from the reference state
    std::vector<double> v;       // relative values, v(reference) = 0
    std::uint64_t sweeps = 0;    // 0 for a direct solve
    bool direct = false;
};

PolicyEvaluation evaluate_policy(const InstanceParameters& inst, const StationaryPolicy& policy,
                                 const SystemState& reference, const DpOptions& options = {});

/// Sweeps only; `warm` seeds the relative values (empty for a cold start).
PolicyEvaluation evaluate_policy_iterative(const InstanceParameters& inst,
                                           const StationaryPolicy& policy,
                                           const SystemState& reference, const DpOptions& options,
                                           const std::vector<double>& warm = {});
PolicyEvaluation evaluate_policy_direct(const InstanceParameters& inst,
                                        const StationaryPolicy& policy,
                                        const SystemState& reference);

struct DpSolution {
    double g_star = 0.0;
    std::vector<double> v;
    StationaryPolicy policy;
    int iterations = 0;
    std::vector<double> g_history;  // average cost of every evaluated policy
    double seconds = 0.0;
};

/// Average-cost policy iteration from `base`. Improvement keeps the incumbent
/// action unless another action is better by more than a small margin, and
/// otherwise picks the smallest node id among the minimizers.
DpSolution policy_iteration(const InstanceParameters& inst, const StationaryPolicy& base,
                            const SystemState& reference, const DpOptions& options = {});

/// Greedy policy with respect to `v` (incumbent retained on near-ties).
StationaryPolicy improve_policy(const InstanceParameters& inst, const StationaryPolicy& incumbent,
                                const std::vector<double>& v, double margin);

/// u* = sum_j f_j(K_j) - g*.
double reward_optimum(const InstanceParameters& inst, const DpSolution& sol);

/// max_x |g + v(x) - min_a Q(x, a)| for the returned solution.
double optimality_residual(const InstanceParameters& inst, const DpSolution& sol);

/// {"states": [{"location": 1, "x": [..], "action": 2}, ...]} with 1-based ids.
std::string policy_to_json(const InstanceParameters& inst, const StationaryPolicy& policy);

}  // namespace netrepair
