#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netrepair/dp.hpp"
#include "netrepair/experiments.hpp"
#include "netrepair/fixtures.hpp"
#include "netrepair/index_policy.hpp"
#include "netrepair/opi.hpp"
#include "netrepair/polling.hpp"

namespace py = pybind11;
using namespace netrepair;

namespace {

py::dict report_dict(const SimulationReport& r) {
    py::dict d;
    d["policy"] = r.policy;
    d["steps"] = r.steps;
    d["g"] = r.average_cost;
    d["u"] = r.average_reward;
    d["safe_fraction"] = r.safe_fraction();
    return d;
}

InstanceParameters generate(std::uint64_t seed, std::optional<int> machines, std::optional<int> cap,
                            std::optional<std::string> cost_kind) {
    GenerateOverrides pins;
    pins.machines = machines;
    pins.cap = cap;
    if (cost_kind) pins.cost_kind = cost_kind_from_string(*cost_kind);
    return generate_instance(seed, pins);
}

py::dict solve(const InstanceParameters& inst, std::uint64_t max_states) {
    IndexPolicy rule(inst, true);
    DpOptions options;
    options.max_states = max_states;
    const auto sol = policy_iteration(inst, tabulate(inst, rule, max_states), initial_state(inst), options);
    py::dict d;
    d["g_star"] = sol.g_star;
    d["u_star"] = reward_optimum(inst, sol);
    d["iterations"] = sol.iterations;
    d["residual"] = optimality_residual(inst, sol);
    return d;
}

py::dict evaluate_index(const InstanceParameters& inst, bool modified) {
    IndexPolicy rule(inst, modified);
    const auto ev = evaluate_policy(inst, tabulate(inst, rule), initial_state(inst));
    py::dict d;
    d["g"] = ev.g;
    d["u"] = ev.u;
    return d;
}

py::dict simulate_policy(const InstanceParameters& inst, const std::string& policy, std::uint64_t steps,
                         std::uint64_t crn_seed) {
    const auto crn = make_crn(crn_seed, steps);
    const SystemState x0 = initial_state(inst);
    if (policy == "index" || policy == "modified-index") {
        IndexPolicy p(inst, policy == "modified-index");
        return report_dict(simulate(inst, p, x0, steps, crn));
    }
    if (policy == "passive") {
        PassivePolicy p;
        return report_dict(simulate(inst, p, x0, steps, crn));
    }
    if (policy == "polling") {
        const auto result = best_polling_report(inst, x0, steps, crn);
        auto d = report_dict(result.best_report());
        d["tour"] = result.best_tour().label();
        return d;
    }
    throw std::invalid_argument("unknown policy '" + policy + "'");
}

py::dict opi(const InstanceParameters& inst, std::uint64_t steps, std::uint64_t seed, std::uint64_t r1,
             std::uint64_t r2, std::uint64_t r_off, std::uint64_t tau_max_steps, std::uint64_t nested_rounds) {
    OpiBudget budget;
    budget.r1 = r1;
    budget.r2 = r2;
    budget.r_off = r_off;
    budget.tau_max_steps = tau_max_steps;
    budget.nested_rounds = nested_rounds;
    budget.r_on = steps;
    const auto result = run_opi(inst, budget, seed, initial_state(inst), make_crn(seed, steps));
    auto d = report_dict(result.online.report);
    d["g_base"] = result.preparatory.g_base;
    d["store_size"] = result.store.size();
    d["safe_quartiles"] = std::vector<double>(result.online.safe_quartile_fraction.begin(),
                                              result.online.safe_quartile_fraction.end());
    return d;
}

std::string benchmark(const std::vector<std::uint64_t>& seeds, std::optional<int> machines,
                      std::optional<int> cap, std::uint64_t steps, int threads) {
    ExperimentConfig config;
    config.seeds = seeds;
    config.overrides.machines = machines;
    config.overrides.cap = cap;
    config.steps = steps;
    config.threads = threads;
    return records_csv(run_benchmark(config));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Repair-and-maintenance scheduling on networks";

    py::class_<InstanceParameters>(m, "Instance")
        .def_property_readonly("machines", &InstanceParameters::machine_count)
        .def_property_readonly("nodes", [](const InstanceParameters& i) { return i.layout.node_count(); })
        .def_readonly("lam", &InstanceParameters::lambda)
        .def_readonly("mu", &InstanceParameters::mu)
        .def_readonly("tau", &InstanceParameters::tau)
        .def_readonly("cap", &InstanceParameters::cap)
        .def_readonly("seed", &InstanceParameters::seed)
        .def_readonly("label", &InstanceParameters::label)
        .def_property_readonly("cost_kind", [](const InstanceParameters& i) { return to_string(i.cost.kind); })
        .def_property_readonly("states", &InstanceParameters::state_count)
        .def_property_readonly("failed_cost_total", &InstanceParameters::failed_cost_total)
        .def("to_json", [](const InstanceParameters& i) { return instance_to_json(i); })
        .def_static("from_json", [](const std::string& text) { return instance_from_json(text); })
        .def("__eq__", [](const InstanceParameters& a, const InstanceParameters& b) { return a == b; });

    m.def("generate_instance", &generate, py::arg("seed"), py::arg("machines") = py::none(),
          py::arg("cap") = py::none(), py::arg("cost_kind") = py::none());
    m.def("example1_instance", &example1_instance);
    m.def("appendix_d_instances", &appendix_d_instances);
    m.def("solve_dp", &solve, py::arg("inst"), py::arg("max_states") = kDefaultDpStateLimit);
    m.def("evaluate_index", &evaluate_index, py::arg("inst"), py::arg("modified") = false);
    m.def("simulate", &simulate_policy, py::arg("inst"), py::arg("policy"), py::arg("steps") = 50'000,
          py::arg("crn_seed") = 0);
    m.def("run_opi", &opi, py::arg("inst"), py::arg("steps") = 50'000, py::arg("seed") = 0,
          py::arg("r1") = 10'000, py::arg("r2") = 100'000, py::arg("r_off") = 2'000,
          py::arg("tau_max_steps") = 200'000, py::arg("nested_rounds") = 1);
    m.def("benchmark_csv", &benchmark, py::arg("seeds"), py::arg("machines") = py::none(),
          py::arg("cap") = py::none(), py::arg("steps") = 50'000, py::arg("threads") = 1);
    m.def("verify_fixtures", [] {
        std::vector<std::pair<std::string, bool>> out;
        for (const auto& r : verify_all()) out.emplace_back(r.name, r.passed);
        return out;
    });

    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);
}
