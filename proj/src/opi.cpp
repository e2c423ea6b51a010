#include "netrepair/opi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "netrepair/index_policy.hpp"

namespace netrepair {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double learning_rate(std::uint64_t s) { return 10.0 / (10.0 + static_cast<double>(s) - 1.0); }

void observe(ValueStoreEntry& e, double observation) {
    e.s += 1;
    const double a = learning_rate(e.s);
    e.h = (1.0 - a) * e.h + a * observation;
    e.ss = (1.0 - a) * e.ss + a * observation * observation;
    e.w = (1.0 - a) * (1.0 - a) * e.w + a * a;
}

// ---------------------------------------------------------------------------

ValueStore::ValueStore(const InstanceParameters& inst, SystemState reference, double g_base)
    : codec_(inst), reference_(std::move(reference)), g_base_(g_base) {
    reference_key_ = codec_.encode(reference_);
    entries_[reference_key_] = ValueStoreEntry{0.0, 0.0, 1.0, 1};
}

const ValueStoreEntry* ValueStore::find(std::uint64_t key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::uint64_t, ValueStoreEntry>> ValueStore::sorted() const {
    std::vector<std::pair<std::uint64_t, ValueStoreEntry>> out(entries_.begin(), entries_.end());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

std::string ValueStore::to_json() const {
    nlohmann::json doc;
    doc["reference"] = {{"location", reference_.location + 1}, {"x", reference_.conditions}};
    doc["g_base"] = g_base_;
    auto& rows = doc["entries"] = nlohmann::json::array();
    for (const auto& [key, e] : sorted()) {
        const SystemState x = codec_.decode(key);
        rows.push_back({{"location", x.location + 1},
                        {"x", x.conditions},
                        {"h", e.h},
                        {"SS", e.ss},
                        {"W", e.w},
                        {"s", e.s}});
    }
    return doc.dump(2);
}

ValueStore ValueStore::from_json(const InstanceParameters& inst, const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    auto read_state = [&](const nlohmann::json& node) {
        SystemState x{node.at("location").get<NodeId>() - 1, node.at("x").get<std::vector<int>>()};
        if (x.location < 0 || x.location >= inst.layout.node_count() ||
            x.conditions.size() != static_cast<std::size_t>(inst.machine_count())) {
            throw std::invalid_argument("value store: state does not fit the instance");
        }
        for (int j = 0; j < inst.machine_count(); ++j) {
            if (x.conditions[j] < 0 || x.conditions[j] > inst.cap[j]) {
                throw std::invalid_argument("value store: level outside 0..K");
            }
        }
        return x;
    };
    ValueStore store(inst, read_state(doc.at("reference")), doc.at("g_base").get<double>());
    store.entries_.clear();
    for (const auto& row : doc.at("entries")) {
        ValueStoreEntry e{row.at("h").get<double>(), row.at("SS").get<double>(),
                          row.at("W").get<double>(), row.at("s").get<std::uint64_t>()};
        store.entries_[store.codec_.encode(read_state(row))] = e;
    }
    if (!store.contains(store.reference_key_)) {
        throw std::invalid_argument("value store: reference state has no entry");
    }
    return store;
}

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

Interval confidence_interval(const ValueStoreEntry& e) {
    const Interval unbounded{-kInf, kInf};
    if (e.s < 2 || e.w >= 1.0 - 1e-12) {
        return unbounded;
    }
    double spread = e.ss - e.h * e.h;
    // cancellation can leave a tiny negative residue for constant data
    const double noise = 1e-12 * std::max(1.0, std::abs(e.ss));
    if (spread < -noise) {
        return unbounded;
    }
    spread = std::max(spread, 0.0);
    const double half = kNormalQuantile975 * std::sqrt(spread / (1.0 - e.w) * e.w);
    return Interval{e.h - half, e.h + half};
}

// ---------------------------------------------------------------------------

OpiBudget OpiBudget::paper_scale() {
    OpiBudget b;
    b.mode = BudgetMode::WallClock;
    b.r1 = 10'000;
    b.r2 = 500'000;
    b.r_off = 100'000;
    b.tau_max_seconds = 100.0;
    b.r_on = 500'000;
    b.delta_seconds = 0.01;
    return b;
}

OpiBudget OpiBudget::desk_scale() { return OpiBudget{}; }

void OpiBudget::validate() const {
    if (r1 == 0 || r2 == 0 || r_off == 0 || r_on == 0 || max_trajectory_steps == 0) {
        throw std::invalid_argument("OPI budget: iteration counts must be positive");
    }
    if (mode == BudgetMode::WallClock && (!(tau_max_seconds > 0.0) || !(delta_seconds > 0.0))) {
        throw std::invalid_argument("OPI budget: time limits must be positive");
    }
    if (mode == BudgetMode::StepCount && (tau_max_steps == 0 || nested_rounds == 0)) {
        throw std::invalid_argument("OPI budget: step limits must be positive");
    }
}

// ---------------------------------------------------------------------------

TrajectoryResult sample_trajectory(const InstanceParameters& inst, Policy& base, ValueStore& store,
                                   const SystemState& z, std::size_t p, Rng& rng,
                                   std::uint64_t max_steps) {
    const auto start = Clock::now();
    const StateCodec& codec = store.codec();
    if (!store.contains(store.reference_key())) {
        throw std::invalid_argument("sample_trajectory: reference state missing from the store");
    }
    const UniformizedChain chain(inst);
    const std::uint64_t z_key = codec.encode(z);

    TrajectoryResult out;
    std::vector<std::uint64_t> visited_keys{z_key};
    out.visited_prefix.push_back({z, 0.0, 0});
    std::unordered_map<std::uint64_t, bool> seen{{z_key, true}};

    double cost = 0.0;
    std::uint64_t steps = 0;
    SystemState current = z;
    std::uint64_t stop_key = 0;
    while (true) {
        cost += chain.cost(current);
        ++steps;
        const Action a = base.decide(current);
        chain.advance(current, a, rng.uniform());
        const std::uint64_t key = codec.encode(current);
        if ((key != z_key || key == store.reference_key()) && store.contains(key)) {
            stop_key = key;
            break;
        }
        if (steps >= max_steps) {
            throw std::runtime_error("sample_trajectory: no stored state reached within " +
                                     std::to_string(max_steps) + " steps");
        }
        if (out.visited_prefix.size() < p && !seen.contains(key)) {
            seen.emplace(key, true);
            visited_keys.push_back(key);
            out.visited_prefix.push_back({current, cost, steps});
        }
    }

    // only the first p first-visits are used, so later ones are not recorded
    for (std::size_t k = 0; k < out.visited_prefix.size() && k < p; ++k) {
        const auto& rec = out.visited_prefix[k];
        ValueStoreEntry& e = store.entry(visited_keys[k]);
        const double h_stop = store.find(stop_key)->h;
        const double sample = (cost - rec.cost) + h_stop -
                              store.g_base() * static_cast<double>(steps - rec.steps);
        observe(e, sample);
    }
    out.visited_prefix.resize(std::min(out.visited_prefix.size(), p));
    out.stopping_state = codec.decode(stop_key);
    out.total_cost = cost;
    out.total_steps = steps;
    out.seconds = seconds_since(start);
    return out;
}

// ---------------------------------------------------------------------------

PreparatoryResult offline_preparatory(const InstanceParameters& inst, Policy& base,
                                      const OpiBudget& budget, Rng& rng) {
    budget.validate();
    const UniformizedChain chain(inst);
    const StateCodec codec(inst);
    const int m = inst.machine_count();
    PreparatoryResult out;

    for (int i = 0; i < m; ++i) {
        SystemState x = initial_state(inst);
        x.location = i;
        std::map<std::uint64_t, std::uint64_t> counts;
        for (std::uint64_t r = 0; r < budget.r1; ++r) {
            chain.advance(x, base.decide(x), rng.uniform());
            if (x.location == i) {
                ++counts[codec.encode(x)];
            }
        }
        // most visited, smallest key among ties; the start state if never back
        std::uint64_t best_key = codec.encode(SystemState{i, initial_state(inst).conditions});
        std::uint64_t best_count = 0;
        for (const auto& [key, count] : counts) {
            if (count > best_count) {
                best_key = key;
                best_count = count;
            }
        }
        out.core.push_back(codec.decode(best_key));
    }

    SystemState x = initial_state(inst);
    double cost = 0.0;
    std::vector<std::uint64_t> machine_visits(m, 0);
    for (std::uint64_t r = 0; r < budget.r2; ++r) {
        cost += chain.cost(x);
        chain.advance(x, base.decide(x), rng.uniform());
        if (inst.layout.is_machine(x.location)) {
            ++machine_visits[x.location];
        }
    }
    out.g_base = cost / static_cast<double>(budget.r2);
    out.busiest_machine = static_cast<int>(
        std::max_element(machine_visits.begin(), machine_visits.end()) - machine_visits.begin());
    out.reference = out.core[out.busiest_machine];
    std::rotate(out.core.begin(), out.core.begin() + out.busiest_machine,
                out.core.begin() + out.busiest_machine + 1);

    std::vector<std::uint64_t> added;
    auto add = [&](const SystemState& s) {
        const auto key = codec.encode(s);
        if (std::find(added.begin(), added.end(), key) == added.end()) {
            added.push_back(key);
            out.representative.push_back(s);
        }
    };
    for (const auto& z : out.core) {
        add(z);
        for (NodeId j : inst.layout.neighbors(z.location)) {
            SystemState moved = z;
            moved.location = j;
            add(moved);
        }
        if (inst.layout.is_machine(z.location) && z.conditions[z.location] >= 1) {
            SystemState repaired = z;
            --repaired.conditions[z.location];
            add(repaired);
        }
    }
    return out;
}

namespace {

bool within_offline_budget(const OpiBudget& budget, std::uint64_t trajectories, double seconds,
                           std::uint64_t steps) {
    if (trajectories >= budget.r_off) return false;
    if (budget.mode == BudgetMode::WallClock) return seconds < budget.tau_max_seconds;
    return steps < budget.tau_max_steps;
}

}  // namespace

ValueStore offline_main(const InstanceParameters& inst, Policy& base, const PreparatoryResult& prep,
                        const OpiBudget& budget, Rng& rng) {
    budget.validate();
    ValueStore store(inst, prep.reference, prep.g_base);
    for (const auto& z : prep.representative) {
        std::uint64_t r = 0, steps = 0;
        double seconds = 0.0;
        while (within_offline_budget(budget, r, seconds, steps)) {
            const auto t = sample_trajectory(inst, base, store, z, 1, rng, budget.max_trajectory_steps);
            ++r;
            seconds += t.seconds;
            steps += t.total_steps;
        }
    }
    for (const auto& core : prep.core) {
        SystemState z = core;
        std::uint64_t r = 0, steps = 0;
        double seconds = 0.0;
        while (within_offline_budget(budget, r, seconds, steps)) {
            auto t = sample_trajectory(inst, base, store, z, 5, rng, budget.max_trajectory_steps);
            z = std::move(t.stopping_state);
            ++r;
            seconds += t.seconds;
            steps += t.total_steps;
        }
    }
    return store;
}

// ---------------------------------------------------------------------------

std::vector<SystemState> neighbourhood(const InstanceParameters& inst, const SystemState& x) {
    std::vector<SystemState> out{x};
    for (NodeId j : inst.layout.neighbors(x.location)) {
        SystemState moved = x;
        moved.location = j;
        out.push_back(std::move(moved));
    }
    if (inst.layout.is_machine(x.location) && x.conditions[x.location] >= 1) {
        SystemState repaired = x;
        --repaired.conditions[x.location];
        out.push_back(std::move(repaired));
    }
    return out;
}

bool certainly_better(double r1, const Interval& y1, double r2, const Interval& y2,
                      const Interval& x) {
    // upper end of r1 h(y1) - r2 h(y2) + (r2 - r1) h(x) over the box
    double worst = 0.0;
    if (r1 > 0.0) worst += r1 * y1.hi;
    if (r2 > 0.0) worst -= r2 * y2.lo;
    const double cx = r2 - r1;
    if (cx > 0.0) worst += cx * x.hi;
    if (cx < 0.0) worst += cx * x.lo;
    return std::isfinite(worst) && worst < 0.0;
}

ActionChoice improving_action(const InstanceParameters& inst, const SystemState& x,
                              const ValueStore& store, Policy& base) {
    const UniformizedChain chain(inst);
    const StateCodec& codec = store.codec();
    auto interval_of = [&](const SystemState& y) {
        const ValueStoreEntry* e = store.find(codec.encode(y));
        return e ? confidence_interval(*e) : Interval{-kInf, kInf};
    };

    struct Candidate {
        Action action;
        double rate;
        Interval target;
    };
    std::vector<Candidate> candidates;
    const NodeId i = x.location;
    if (inst.layout.is_machine(i) && x.conditions[i] >= 1) {
        SystemState repaired = x;
        --repaired.conditions[i];
        candidates.push_back({i, chain.repair_probability(i), interval_of(repaired)});
    } else {
        candidates.push_back({i, 0.0, Interval{0.0, 0.0}});
    }
    for (NodeId j : inst.layout.neighbors(i)) {
        SystemState moved = x;
        moved.location = j;
        candidates.push_back({j, chain.switch_probability(), interval_of(moved)});
    }
    const Interval here = interval_of(x);

    for (const auto& a : candidates) {
        bool beats_all = true;
        for (const auto& b : candidates) {
            if (a.action == b.action) continue;
            if (!certainly_better(a.rate, a.target, b.rate, b.target, here)) {
                beats_all = false;
                break;
            }
        }
        if (beats_all) {
            return {a.action, false};
        }
    }
    return {base.decide(x), true};
}

// ---------------------------------------------------------------------------

OnlineResult online_run(const InstanceParameters& inst, Policy& base, ValueStore& store,
                        const OpiBudget& budget, const SystemState& x0,
                        std::span<const double> crn, Rng& nested) {
    budget.validate();
    if (crn.size() < budget.r_on) {
        throw std::invalid_argument("online_run: common random number list shorter than R_on");
    }
    const UniformizedChain chain(inst);
    OnlineResult out;
    SimulationReport& report = out.report;
    report.policy = "opi";
    report.steps = budget.r_on;
    report.visits.assign(static_cast<std::size_t>(inst.layout.node_count()), 0);
    std::array<std::uint64_t, 4> safe_in_quartile{};
    std::array<std::uint64_t, 4> steps_in_quartile{};

    SystemState x = x0;
    for (std::uint64_t r = 0; r < budget.r_on; ++r) {
        report.total_cost += chain.cost(x);
        ++report.visits[x.location];
        const ActionChoice choice = improving_action(inst, x, store, base);
        report.total_reward += chain.reward(x, choice.action);
        const auto quartile = static_cast<std::size_t>(std::min<std::uint64_t>(3, 4 * r / budget.r_on));
        ++steps_in_quartile[quartile];
        if (choice.safe) {
            ++report.safe_actions;
            ++safe_in_quartile[quartile];
        }

        const auto start = Clock::now();
        double spent = 0.0;
        bool out_of_time = false;
        for (std::uint64_t round = 0; !out_of_time; ++round) {
            if (budget.mode == BudgetMode::StepCount && round >= budget.nested_rounds) break;
            SystemState next = x;
            chain.advance(next, choice.action, nested.uniform());
            for (const auto& y : neighbourhood(inst, next)) {
                sample_trajectory(inst, base, store, y, 1, nested, budget.max_trajectory_steps);
                ++out.nested_trajectories;
                if (budget.mode == BudgetMode::WallClock) {
                    spent = seconds_since(start);
                    if (spent >= budget.delta_seconds) {
                        out_of_time = true;
                        break;
                    }
                }
            }
        }

        chain.advance(x, choice.action, crn[r]);
    }
    report.average_cost = report.total_cost / static_cast<double>(budget.r_on);
    report.average_reward = report.total_reward / static_cast<double>(budget.r_on);
    for (std::size_t q = 0; q < 4; ++q) {
        out.safe_quartile_fraction[q] =
            steps_in_quartile[q] ? static_cast<double>(safe_in_quartile[q]) / steps_in_quartile[q] : 0.0;
    }
    return out;
}

OpiResult run_opi(const InstanceParameters& inst, const OpiBudget& budget, std::uint64_t seed,
                  const SystemState& x0, std::span<const double> crn) {
    IndexPolicy base(inst, true);
    Rng offline(seed, Stream::OpiOffline);
    Rng nested(seed, Stream::OpiNested);
    PreparatoryResult prep = offline_preparatory(inst, base, budget, offline);
    ValueStore store = offline_main(inst, base, prep, budget, offline);
    OnlineResult online = online_run(inst, base, store, budget, x0, crn, nested);
    return OpiResult{std::move(prep), std::move(store), std::move(online)};
}

}  // namespace netrepair
