#include "netrepair/dp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"

namespace netrepair {

namespace {

/// Off-diagonal transitions of one stationary policy in compressed rows.
struct PolicyKernel {
    std::vector<double> cost;
    std::vector<double> reward;
    std::vector<std::uint64_t> row_begin;
    std::vector<std::uint64_t> target;
    std::vector<double> probability;
};

void check_size(const StateCodec& codec, const DpOptions& options) {
    if (codec.size() > options.max_states) {
        throw CapacityError("state space has " + std::to_string(codec.size()) +
                            " states, above the bound of " + std::to_string(options.max_states));
    }
}

PolicyKernel build_kernel(const InstanceParameters& inst, const StationaryPolicy& policy) {
    const UniformizedChain chain(inst);
    const StateCodec& codec = policy.codec();
    const int m = inst.machine_count();
    const std::uint64_t n = codec.size();
    PolicyKernel k;
    k.cost.resize(n);
    k.reward.resize(n);
    k.row_begin.reserve(n + 1);
    k.row_begin.push_back(0);
    for (std::uint64_t s = 0; s < n; ++s) {
        const SystemState x = codec.decode(s);
        const Action a = policy.at(s);
        k.cost[s] = chain.cost(x);
        k.reward[s] = chain.reward(x, a);
        for (int j = 0; j < m; ++j) {
            if (x.conditions[j] < inst.cap[j]) {
                k.target.push_back(s + codec.stride(j));
                k.probability.push_back(chain.degrade_probability(j));
            }
        }
        if (a == x.location) {
            if (inst.layout.is_machine(a) && x.conditions[a] >= 1) {
                k.target.push_back(s - codec.stride(a));
                k.probability.push_back(chain.repair_probability(a));
            }
        } else {
            k.target.push_back(codec.relocate(s, a));
            k.probability.push_back(chain.switch_probability());
        }
        k.row_begin.push_back(k.target.size());
    }
    return k;
}

double span(const std::vector<double>& g) {
    const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
    return *hi - *lo;
}

}  // namespace

PolicyEvaluation evaluate_policy_iterative(const InstanceParameters& inst,
                                           const StationaryPolicy& policy,
                                           const SystemState& reference, const DpOptions& options,
                                           const std::vector<double>& warm) {
    const StateCodec& codec = policy.codec();
    check_size(codec, options);
    const PolicyKernel k = build_kernel(inst, policy);
    const std::uint64_t n = codec.size();
    const std::uint64_t ref = codec.encode(reference);

    std::vector<double> v = warm.size() == n ? warm : std::vector<double>(n, 0.0);
    std::vector<double> w(n, 0.0);
    std::vector<double> g(n, 0.0), gr(n, 0.0), g_next(n), gr_next(n), v_next(n), w_next(n);

    // Stop when the per-state gains agree (span bound on the reference gain)
    // or, for a chain with several recurrent classes, when they stop moving.
    for (std::uint64_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double change = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            double dv = k.cost[s];
            double dw = k.reward[s];
            for (std::uint64_t e = k.row_begin[s]; e < k.row_begin[s + 1]; ++e) {
                const std::uint64_t y = k.target[e];
                dv += k.probability[e] * (v[y] - v[s]);
                dw += k.probability[e] * (w[y] - w[s]);
            }
            v_next[s] = v[s] + dv;
            w_next[s] = w[s] + dw;
            change = std::max({change, std::abs(dv - g[s]), std::abs(dw - gr[s])});
            g_next[s] = dv;
            gr_next[s] = dw;
        }
        const double v_ref = v_next[ref];
        const double w_ref = w_next[ref];
        for (std::uint64_t s = 0; s < n; ++s) {
            v_next[s] -= v_ref;
            w_next[s] -= w_ref;
        }
        std::swap(v, v_next);
        std::swap(w, w_next);
        std::swap(g, g_next);
        std::swap(gr, gr_next);
        const bool settled = span(g) < options.tol && span(gr) < options.tol;
        const bool stalled = sweep > 1 && change < options.tol * 1e-3;
        if (settled || stalled) {
            PolicyEvaluation out;
            out.g = g[ref];
            out.u = gr[ref];
            out.v = std::move(v);
            out.sweeps = sweep;
            return out;
        }
    }
    throw ConvergenceError("policy evaluation did not converge within " +
                           std::to_string(options.max_sweeps) + " sweeps");
}

PolicyEvaluation evaluate_policy_direct(const InstanceParameters& inst,
                                        const StationaryPolicy& policy,
                                        const SystemState& reference) {
    const StateCodec& codec = policy.codec();
    const PolicyKernel k = build_kernel(inst, policy);
    const auto n = static_cast<Eigen::Index>(codec.size());
    const auto ref = static_cast<Eigen::Index>(codec.encode(reference));

    // unknowns: v(x) for x != ref, and g stored in the reference slot
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(k.target.size() + 2 * static_cast<std::size_t>(n));
    for (Eigen::Index s = 0; s < n; ++s) {
        entries.emplace_back(s, ref, 1.0);
        double out = 0.0;
        for (std::uint64_t e = k.row_begin[s]; e < k.row_begin[s + 1]; ++e) {
            const auto y = static_cast<Eigen::Index>(k.target[e]);
            out += k.probability[e];
            if (y != ref) {
                entries.emplace_back(s, y, -k.probability[e]);
            }
        }
        if (s != ref) {
            entries.emplace_back(s, s, out);
        }
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw ConvergenceError("direct policy evaluation: singular system (policy is not unichain)");
    }
    Eigen::MatrixXd rhs(n, 2);
    for (Eigen::Index s = 0; s < n; ++s) {
        rhs(s, 0) = k.cost[static_cast<std::size_t>(s)];
        rhs(s, 1) = k.reward[static_cast<std::size_t>(s)];
    }
    const Eigen::MatrixXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) {
        throw ConvergenceError("direct policy evaluation: solve failed");
    }
    PolicyEvaluation out;
    out.direct = true;
    out.g = sol(ref, 0);
    out.u = sol(ref, 1);
    out.v.resize(static_cast<std::size_t>(n));
    for (Eigen::Index s = 0; s < n; ++s) {
        out.v[static_cast<std::size_t>(s)] = s == ref ? 0.0 : sol(s, 0);
    }
    return out;
}

namespace {

PolicyEvaluation evaluate(const InstanceParameters& inst, const StationaryPolicy& policy,
                          const SystemState& reference, const DpOptions& options,
                          const std::vector<double>& warm) {
    check_size(policy.codec(), options);
    switch (options.method) {
        case EvaluationMethod::SuccessiveApproximation:
            return evaluate_policy_iterative(inst, policy, reference, options, warm);
        case EvaluationMethod::Direct:
            return evaluate_policy_direct(inst, policy, reference);
        case EvaluationMethod::Automatic:
            break;
    }
    try {
        return evaluate_policy_iterative(inst, policy, reference, options, warm);
    } catch (const ConvergenceError&) {
        return evaluate_policy_direct(inst, policy, reference);
    }
}

}  // namespace

PolicyEvaluation evaluate_policy(const InstanceParameters& inst, const StationaryPolicy& policy,
                                 const SystemState& reference, const DpOptions& options) {
    return evaluate(inst, policy, reference, options, {});
}

StationaryPolicy improve_policy(const InstanceParameters& inst, const StationaryPolicy& incumbent,
                                const std::vector<double>& v, double margin) {
    const UniformizedChain chain(inst);
    const StateCodec& codec = incumbent.codec();
    std::vector<Action> actions(codec.size());
    for (std::uint64_t s = 0; s < codec.size(); ++s) {
        const NodeId here = codec.location_of(s);
        // degradation terms do not depend on the action, so compare the rest
        auto delta = [&](Action a) {
            if (a != here) {
                return chain.switch_probability() * (v[codec.relocate(s, a)] - v[s]);
            }
            if (inst.layout.is_machine(here) && codec.condition_of(s, here) >= 1) {
                return chain.repair_probability(here) * (v[s - codec.stride(here)] - v[s]);
            }
            return 0.0;
        };
        double best = delta(here);
        for (NodeId w : inst.layout.neighbors(here)) {
            best = std::min(best, delta(w));
        }
        const Action current = incumbent.at(s);
        if (delta(current) <= best + margin) {
            actions[s] = current;
            continue;
        }
        Action choice = delta(here) <= best + margin ? here : -1;
        for (NodeId w : inst.layout.neighbors(here)) {
            if (delta(w) <= best + margin && (choice < 0 || w < choice)) {
                choice = w;
            }
        }
        actions[s] = choice;
    }
    return StationaryPolicy(inst, std::move(actions), "optimal");
}

DpSolution policy_iteration(const InstanceParameters& inst, const StationaryPolicy& base,
                            const SystemState& reference, const DpOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    check_size(base.codec(), options);
    DpSolution sol;
    StationaryPolicy current(inst, base.actions(), "optimal");
    PolicyEvaluation eval = evaluate(inst, current, reference, options, {});
    sol.g_history.push_back(eval.g);
    for (int it = 1; it <= options.max_iterations; ++it) {
        double scale = 1.0;
        for (double x : eval.v) scale = std::max(scale, std::abs(x));
        StationaryPolicy next = improve_policy(inst, current, eval.v, 1e-11 * scale);
        sol.iterations = it;
        if (next == current) {
            break;
        }
        current = std::move(next);
        eval = evaluate(inst, current, reference, options, eval.v);
        sol.g_history.push_back(eval.g);
    }
    sol.g_star = eval.g;
    sol.v = std::move(eval.v);
    sol.policy = std::move(current);
    sol.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

double reward_optimum(const InstanceParameters& inst, const DpSolution& sol) {
    return inst.failed_cost_total() - sol.g_star;
}

double optimality_residual(const InstanceParameters& inst, const DpSolution& sol) {
    const UniformizedChain chain(inst);
    const StateCodec& codec = sol.policy.codec();
    const auto& v = sol.v;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < codec.size(); ++s) {
        const SystemState x = codec.decode(s);
        double best = std::numeric_limits<double>::infinity();
        for (Action a : admissible_actions(inst, x)) {
            double q = chain.cost(x) + v[s];
            for (const auto& ev : chain.transitions(x, a)) {
                std::uint64_t y = s;
                switch (ev.kind) {
                    case EventKind::Degrade:
                        y = s + codec.stride(ev.target);
                        break;
                    case EventKind::Repair:
                        y = s - codec.stride(ev.target);
                        break;
                    case EventKind::SwitchArrive:
                        y = codec.relocate(s, ev.target);
                        break;
                    case EventKind::SelfLoop:
                        break;
                }
                q += ev.probability * (v[y] - v[s]);
            }
            best = std::min(best, q);
        }
        worst = std::max(worst, std::abs(sol.g_star + v[s] - best));
    }
    return worst;
}

std::string policy_to_json(const InstanceParameters& inst, const StationaryPolicy& policy) {
    nlohmann::json doc;
    doc["label"] = inst.label;
    auto& rows = doc["states"] = nlohmann::json::array();
    const StateCodec& codec = policy.codec();
    for (std::uint64_t s = 0; s < codec.size(); ++s) {
        const SystemState x = codec.decode(s);
        rows.push_back({{"location", x.location + 1},
                        {"x", x.conditions},
                        {"action", policy.at(s) + 1}});
    }
    return doc.dump(2);
}

}  // namespace netrepair
