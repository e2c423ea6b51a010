#include "netrepair/index_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace netrepair {

namespace {

std::vector<double> reward_rates(const InstanceParameters& inst, int i) {
    const int K = inst.cap[i];
    std::vector<double> s(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) {
        s[k] = inst.mu[i] * (inst.cost_rate(i, K) - inst.cost_rate(i, k - 1)) / inst.lambda[i];
    }
    return s;
}

// Thomas algorithm on the first-step equations for levels 1..K.
std::vector<double> solve_first_step(double lambda, double mu, const std::vector<double>& s) {
    const int K = static_cast<int>(s.size()) - 1;
    std::vector<double> sub(K + 1, 0.0), diag(K + 1, 0.0), sup(K + 1, 0.0), rhs(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) {
        sub[k] = k >= 2 ? -mu : 0.0;
        diag[k] = k < K ? lambda + mu : mu;
        sup[k] = k < K ? -lambda : 0.0;
        rhs[k] = s[k];
    }
    for (int k = 2; k <= K; ++k) {
        const double w = sub[k] / diag[k - 1];
        diag[k] -= w * sup[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    std::vector<double> out(K + 1, 0.0);
    out[K] = rhs[K] / diag[K];
    for (int k = K - 1; k >= 1; --k) {
        out[k] = (rhs[k] - sup[k] * out[k + 1]) / diag[k];
    }
    return out;
}

double binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    double out = 1.0;
    for (int t = 1; t <= k; ++t) {
        out = out * (n - k + t) / t;
    }
    return out;
}

// P(at least n degradations before the d-th switch completion):
// the n-th degradation must come before the d-th switch.
double tail_probability(int n, int d, double p, double q) {
    if (n <= 0) return 1.0;
    double total = 0.0;
    for (int t = 0; t < d; ++t) {
        total += binomial(n - 1 + t, t) * std::pow(q, n) * std::pow(p, t);
    }
    return total;
}

void check_machine(const InstanceParameters& inst, int j) {
    if (j < 0 || j >= inst.machine_count()) {
        throw std::invalid_argument("machine index " + std::to_string(j + 1) + " out of range");
    }
}

double relative_gap(double a, double b) {
    return 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

bool index_at_least(double a, double b) { return a >= b - relative_gap(a, b); }

RepairStatistics repair_statistics(const InstanceParameters& inst, int machine) {
    check_machine(inst, machine);
    const auto s = reward_rates(inst, machine);
    const std::vector<double> ones(s.size(), 1.0);
    RepairStatistics out;
    out.expected_reward = solve_first_step(inst.lambda[machine], inst.mu[machine], s);
    out.expected_time = solve_first_step(inst.lambda[machine], inst.mu[machine], ones);
    return out;
}

RepairStatistics repair_statistics_closed_form(const InstanceParameters& inst, int machine) {
    check_machine(inst, machine);
    const double lambda = inst.lambda[machine];
    const double mu = inst.mu[machine];
    const int K = inst.cap[machine];
    const auto s = reward_rates(inst, machine);
    RepairStatistics out;
    out.expected_reward.assign(K + 1, 0.0);
    out.expected_time.assign(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) {
        for (int p = 1; p <= K; ++p) {
            const int top = p <= k ? p - 1 : k - 1;
            double c = 0.0;
            for (int r = 0; r <= top; ++r) {
                c += std::pow(lambda, p - 1 - r) * std::pow(mu, r);
            }
            c /= std::pow(mu, p);
            out.expected_reward[k] += c * s[p];
            out.expected_time[k] += c;
        }
    }
    return out;
}

ArrivalDistribution arrival_distribution(double lambda, double tau, int d, int x, int cap) {
    if (d < 1) {
        throw std::invalid_argument("arrival_distribution: distance must be >= 1");
    }
    if (x < 0 || x > cap) {
        throw std::invalid_argument("arrival_distribution: level outside 0..K");
    }
    const double p = tau / (lambda + tau);
    const double q = lambda / (lambda + tau);
    ArrivalDistribution out;
    out.first = x;
    out.cap = cap;
    for (int k = x; k < cap; ++k) {
        out.pmf.push_back(binomial(d + k - x - 1, d - 1) * std::pow(p, d) * std::pow(q, k - x));
        out.expected_travel.push_back((d + k - x) / (tau + lambda));
    }
    // The remaining mass and its conditional travel time in closed form. With
    // D ~ Gamma(d, tau), E[D; N(D) >= n] = (d / tau) P(N(D') >= n), D' ~ Gamma(d+1, tau).
    const int n = cap - x;
    const double tail = tail_probability(n, d, p, q);
    out.pmf.push_back(tail);
    if (tail > 0.0) {
        out.expected_travel.push_back(d / tau * tail_probability(n, d + 1, p, q) / tail);
    } else {
        out.expected_travel.push_back((d + n) / (lambda + tau));
    }
    return out;
}

ArrivalDistribution arrival_distribution(const InstanceParameters& inst, NodeId from, int to,
                                         int x_to) {
    check_machine(inst, to);
    if (from == to) {
        throw std::invalid_argument("arrival_distribution: origin equals destination");
    }
    return arrival_distribution(inst.lambda[to], inst.tau, inst.layout.distance(from, to), x_to,
                                inst.cap[to]);
}

namespace {

double stay_from(const RepairStatistics& st, int x) {
    return x == 0 ? 0.0 : st.expected_reward[x] / st.expected_time[x];
}

double move_from(const RepairStatistics& st, const ArrivalDistribution& arrival) {
    double total = 0.0;
    for (int k = arrival.first; k <= arrival.cap; ++k) {
        if (k == 0) continue;  // no reward to collect at level 0
        total += arrival.probability(k) * st.expected_reward[k] /
                 (arrival.travel(k) + st.expected_time[k]);
    }
    return total;
}

double wait_from(const RepairStatistics& st, const ArrivalDistribution& arrival, double lambda) {
    double total = 0.0;
    const int K = arrival.cap;
    for (int k = arrival.first; k < K; ++k) {
        total += arrival.probability(k) * st.expected_reward[k + 1] /
                 (1.0 / lambda + arrival.travel(k) + st.expected_time[k + 1]);
    }
    total += arrival.probability(K) * st.expected_reward[K] /
             (1.0 / lambda + arrival.travel(K) + st.expected_time[K]);
    return total;
}

}  // namespace

double stay_index(const InstanceParameters& inst, int machine, int x) {
    return stay_from(repair_statistics(inst, machine), x);
}

double move_index(const InstanceParameters& inst, NodeId from, int to, int x_to) {
    return move_from(repair_statistics(inst, to), arrival_distribution(inst, from, to, x_to));
}

double wait_index(const InstanceParameters& inst, NodeId from, int to, int x_to) {
    return wait_from(repair_statistics(inst, to), arrival_distribution(inst, from, to, x_to),
                     inst.lambda[to]);
}

double idle_score(const InstanceParameters& inst, NodeId node) {
    double total_lambda = 0.0;
    for (double l : inst.lambda) total_lambda += l;
    double score = 0.0;
    for (int j = 0; j < inst.machine_count(); ++j) {
        score += inst.lambda[j] / total_lambda * inst.layout.distance(node, j) / inst.tau;
    }
    return score;
}

// ---------------------------------------------------------------------------

IndexTables::IndexTables(const InstanceParameters& inst) : inst_(&inst) {
    const int m = inst.machine_count();
    const int diameter = inst.layout.diameter();
    for (int j = 0; j < m; ++j) {
        stats_.push_back(repair_statistics(inst, j));
        const auto& st = stats_.back();
        std::vector<double> stay(inst.cap[j] + 1);
        for (int x = 0; x <= inst.cap[j]; ++x) stay[x] = stay_from(st, x);
        stay_.push_back(std::move(stay));
        std::vector<std::vector<double>> move(diameter + 1), wait(diameter + 1);
        for (int d = 1; d <= diameter; ++d) {
            for (int x = 0; x <= inst.cap[j]; ++x) {
                const auto arrival = arrival_distribution(inst.lambda[j], inst.tau, d, x, inst.cap[j]);
                move[d].push_back(move_from(st, arrival));
                wait[d].push_back(wait_from(st, arrival, inst.lambda[j]));
            }
        }
        move_.push_back(std::move(move));
        wait_.push_back(std::move(wait));
    }
    for (NodeId v = 0; v < inst.layout.node_count(); ++v) {
        idle_.push_back(idle_score(inst, v));
    }
    for (NodeId v = 1; v < inst.layout.node_count(); ++v) {
        if (idle_[v] < idle_[idle_position_] - relative_gap(idle_[v], idle_[idle_position_])) {
            idle_position_ = v;
        }
    }
    for (int j = 1; j < m; ++j) {
        const double here = stay_[j][inst.cap[j]];
        const double best = stay_[all_failed_target_][inst.cap[all_failed_target_]];
        if (here > best + relative_gap(here, best)) {
            all_failed_target_ = j;
        }
    }
}

double IndexTables::move(NodeId from, int to, int x) const {
    return move_[to][inst_->layout.distance(from, to)][x];
}

double IndexTables::wait(NodeId from, int to, int x) const {
    return wait_[to][inst_->layout.distance(from, to)][x];
}

namespace {

Action head_for(const NetworkLayout& layout, NodeId from, NodeId to) {
    return from == to ? from : layout.next_hop(from, to);
}

}  // namespace

Action index_decision(const IndexTables& tables, const SystemState& x) {
    const auto& inst = tables.instance();
    const NodeId i = x.location;
    const int m = inst.machine_count();
    const bool pristine =
        std::all_of(x.conditions.begin(), x.conditions.end(), [](int level) { return level == 0; });
    if (pristine) {
        return head_for(inst.layout, i, tables.idle_position());
    }
    int best = -1;
    double best_value = 0.0;
    const bool at_machine = inst.layout.is_machine(i);
    for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        const double mv = tables.move(i, j, x.conditions[j]);
        if (at_machine && !index_at_least(mv, tables.wait(i, j, x.conditions[j]))) continue;
        if (best < 0 || mv > best_value + relative_gap(mv, best_value)) {
            best = j;
            best_value = mv;
        }
    }
    if (at_machine) {
        const double stay = tables.stay(i, x.conditions[i]);
        if (best < 0 || !(best_value > stay + relative_gap(best_value, stay))) {
            return i;
        }
    }
    return inst.layout.next_hop(i, best);
}

Action modified_index_decision(const IndexTables& tables, const SystemState& x) {
    const auto& inst = tables.instance();
    bool all_failed = true;
    for (int j = 0; j < inst.machine_count(); ++j) {
        all_failed = all_failed && x.conditions[j] == inst.cap[j];
    }
    if (all_failed) {
        return head_for(inst.layout, x.location, tables.all_failed_target());
    }
    return index_decision(tables, x);
}

Action index_decision(const InstanceParameters& inst, const SystemState& x) {
    return index_decision(IndexTables(inst), x);
}

Action modified_index_decision(const InstanceParameters& inst, const SystemState& x) {
    return modified_index_decision(IndexTables(inst), x);
}

IndexPolicy::IndexPolicy(const InstanceParameters& inst, bool modified)
    : tables_(inst), modified_(modified) {}

Action IndexPolicy::decide(const SystemState& x) {
    return modified_ ? modified_index_decision(tables_, x) : index_decision(tables_, x);
}

std::string index_table_json(const InstanceParameters& inst, const SystemState& x) {
    const IndexTables tables(inst);
    const NodeId i = x.location;
    nlohmann::json doc;
    doc["state"] = describe(x);
    doc["idle_position"] = tables.idle_position() + 1;
    doc["idle_score_here"] = tables.idle(i);
    if (inst.layout.is_machine(i)) {
        doc["stay"] = tables.stay(i, x.conditions[i]);
    }
    auto& rows = doc["machines"] = nlohmann::json::array();
    for (int j = 0; j < inst.machine_count(); ++j) {
        if (j == i) continue;
        const double mv = tables.move(i, j, x.conditions[j]);
        const double wt = tables.wait(i, j, x.conditions[j]);
        rows.push_back({{"machine", j + 1},
                        {"distance", inst.layout.distance(i, j)},
                        {"x", x.conditions[j]},
                        {"move", mv},
                        {"wait", wt},
                        {"eligible", index_at_least(mv, wt)}});
    }
    doc["index_action"] = index_decision(tables, x) + 1;
    doc["modified_index_action"] = modified_index_decision(tables, x) + 1;
    return doc.dump(2);
}

}  // namespace netrepair
