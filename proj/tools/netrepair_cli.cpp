#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "netrepair/csv.hpp"
#include "netrepair/dp.hpp"
#include "netrepair/experiments.hpp"
#include "netrepair/fixtures.hpp"
#include "netrepair/index_policy.hpp"
#include "netrepair/opi.hpp"
#include "netrepair/polling.hpp"

using namespace netrepair;

namespace {

struct InstanceSource {
    std::optional<std::uint64_t> seed;
    std::string file;
    std::optional<int> machines;
    std::optional<int> cap;
    std::string cost;

    void add_to(CLI::App& app) {
        app.add_option("--seed", seed, "Generate the instance from this seed");
        app.add_option("--instance", file, "Load the instance from a JSON file")->check(CLI::ExistingFile);
        app.add_option("--machines", machines, "Pin the machine count when generating")->check(CLI::Range(1, 25));
        app.add_option("--cap", cap, "Pin K when generating")->check(CLI::PositiveNumber);
        app.add_option("--cost", cost, "Pin the cost kind when generating")
            ->check(CLI::IsMember({"linear", "quadratic", "piecewise_linear"}));
    }

    GenerateOverrides overrides() const {
        GenerateOverrides o;
        o.machines = machines;
        o.cap = cap;
        if (!cost.empty()) o.cost_kind = cost_kind_from_string(cost);
        return o;
    }

    InstanceParameters load() const {
        if (!file.empty() && seed) {
            throw CLI::ValidationError("--seed and --instance are mutually exclusive");
        }
        if (!file.empty()) return load_instance(file);
        if (!seed) throw CLI::ValidationError("one of --seed or --instance is required");
        return generate_instance(*seed, overrides());
    }
};

struct BudgetFlags {
    std::string mode = "step";
    bool paper_scale = false;
    std::optional<std::uint64_t> r1, r2, r_off, tau_max_steps, r_on, nested_rounds;
    std::optional<double> tau_max_seconds, delta;

    void add_to(CLI::App& app) {
        app.add_option("--budget-mode", mode, "step (reproducible) or wall (clock-gated)")
            ->check(CLI::IsMember({"step", "wall"}));
        app.add_flag("--paper-scale", paper_scale, "Use the published budgets");
        app.add_option("--r1", r1, "Preparatory stage-1 steps per machine");
        app.add_option("--r2", r2, "Preparatory stage-2 steps");
        app.add_option("--r-off", r_off, "Offline trajectories per start state");
        app.add_option("--tau-max", tau_max_seconds, "Offline seconds per start state (wall mode)");
        app.add_option("--tau-max-steps", tau_max_steps, "Offline steps per start state (step mode)");
        app.add_option("--delta", delta, "Nested sampling seconds per decision (wall mode)");
        app.add_option("--nested-rounds", nested_rounds, "Nested sweeps per decision (step mode)");
    }

    OpiBudget budget() const {
        OpiBudget b = paper_scale ? OpiBudget::paper_scale() : OpiBudget::desk_scale();
        if (mode == "step") b.mode = BudgetMode::StepCount;
        if (mode == "wall") b.mode = BudgetMode::WallClock;
        if (r1) b.r1 = *r1;
        if (r2) b.r2 = *r2;
        if (r_off) b.r_off = *r_off;
        if (tau_max_seconds) b.tau_max_seconds = *tau_max_seconds;
        if (tau_max_steps) b.tau_max_steps = *tau_max_steps;
        if (delta) b.delta_seconds = *delta;
        if (nested_rounds) b.nested_rounds = *nested_rounds;
        b.validate();
        return b;
    }
};

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// "2:1,0,3" means repairer at node 2, levels (1,0,3); all 1-based node ids.
SystemState parse_state(const InstanceParameters& inst, const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw CLI::ValidationError("state must look like LOCATION:x1,x2,...");
    }
    SystemState x;
    x.location = std::stoi(text.substr(0, colon)) - 1;
    std::stringstream levels(text.substr(colon + 1));
    for (std::string item; std::getline(levels, item, ',');) {
        x.conditions.push_back(std::stoi(item));
    }
    if (x.location < 0 || x.location >= inst.layout.node_count() ||
        x.conditions.size() != static_cast<std::size_t>(inst.machine_count())) {
        throw CLI::ValidationError("state does not fit the instance");
    }
    for (int j = 0; j < inst.machine_count(); ++j) {
        if (x.conditions[j] < 0 || x.conditions[j] > inst.cap[j]) {
            throw CLI::ValidationError("state level outside 0..K");
        }
    }
    return x;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-repairer network maintenance: DP, index, polling and OPI policies"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Sample a random lattice instance");
    InstanceSource gen_src;
    std::string gen_out;
    gen_src.add_to(*generate);
    generate->add_option("--out", gen_out, "Output JSON path (stdout if omitted)");

    // solve-dp
    auto* solve = app.add_subcommand("solve-dp", "Policy iteration from the modified index policy");
    InstanceSource dp_src;
    std::string dp_out;
    std::uint64_t dp_limit = kDefaultStateBound;
    dp_src.add_to(*solve);
    solve->add_option("--out", dp_out, "Write the optimal policy as JSON");
    solve->add_option("--max-states", dp_limit, "Refuse instances with more states");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a heuristic policy");
    InstanceSource sim_src;
    std::string sim_policy = "index";
    std::uint64_t sim_steps = 50'000;
    std::optional<std::uint64_t> sim_crn_seed;
    std::string sim_out;
    std::string dump_state;
    sim_src.add_to(*sim);
    sim->add_option("--policy", sim_policy, "index, modified-index, polling or passive")
        ->check(CLI::IsMember({"index", "modified-index", "polling", "passive"}));
    sim->add_option("--steps", sim_steps, "Uniformized steps")->check(CLI::PositiveNumber);
    sim->add_option("--crn-seed", sim_crn_seed, "Seed of the common random numbers (default: instance seed)");
    sim->add_option("--out", sim_out, "Write the report as JSON");
    sim->add_option("--dump-index", dump_state,
                    "Print every index at state LOCATION:x1,x2,... and exit");

    // opi
    auto* opi = app.add_subcommand("opi", "Offline estimation and online improvement");
    InstanceSource opi_src;
    BudgetFlags opi_budget;
    std::uint64_t opi_steps = 50'000;
    std::string opi_out, opi_store_out;
    opi_src.add_to(*opi);
    opi_budget.add_to(*opi);
    opi->add_option("--steps", opi_steps, "Online decisions R_on")->check(CLI::PositiveNumber);
    opi->add_option("--out", opi_out, "Write the online report as JSON");
    opi->add_option("--store-out", opi_store_out, "Write the value store as JSON");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "Compare POL, IND, OPI and DP on a batch");
    std::uint64_t bench_seed = 1;
    std::uint64_t bench_count = 20;
    std::vector<std::string> bench_files;
    InstanceSource bench_pins;
    BudgetFlags bench_budget;
    std::optional<std::uint64_t> bench_steps;
    std::string bench_out;
    std::string bench_tables;
    std::uint64_t bench_dp_limit = kDefaultDpStateLimit;
    int bench_threads = 1;
    bool bench_no_dp = false, bench_no_opi = false, bench_no_polling = false;
    bench->add_option("--seed", bench_seed, "First instance seed");
    bench->add_option("--count", bench_count, "Number of consecutive seeds");
    bench->add_option("--instances", bench_files, "Instance JSON files to add to the batch")
        ->check(CLI::ExistingFile);
    bench->add_option("--machines", bench_pins.machines, "Pin the machine count")->check(CLI::Range(1, 25));
    bench->add_option("--cap", bench_pins.cap, "Pin K")->check(CLI::PositiveNumber);
    bench->add_option("--cost", bench_pins.cost, "Pin the cost kind")
        ->check(CLI::IsMember({"linear", "quadratic", "piecewise_linear"}));
    bench_budget.add_to(*bench);
    bench->add_option("--steps", bench_steps, "R_sim (default 50,000; 500,000 with --paper-scale)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--out", bench_out, "Per-instance CSV (stdout if omitted)");
    bench->add_option("--tables", bench_tables, "Also write the aggregate tables (CSV)");
    bench->add_option("--dp-max-states", bench_dp_limit, "Run DP only up to this many states");
    bench->add_option("--threads", bench_threads, "Instances run in parallel")->check(CLI::PositiveNumber);
    bench->add_flag("--no-dp", bench_no_dp, "Skip the optimal policy");
    bench->add_flag("--no-opi", bench_no_opi, "Skip OPI");
    bench->add_flag("--no-polling", bench_no_polling, "Skip the polling heuristic");

    // report
    auto* report = app.add_subcommand("report", "Aggregate tables from a benchmark CSV");
    std::string report_in, report_out;
    std::vector<std::string> report_keys;
    report->add_option("--in", report_in, "Benchmark CSV")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "Write the aggregate CSV here; tables go to stdout");
    report->add_option("--by", report_keys, "Bucket keys among m, rho, eta, cost, K");

    // verify
    auto* verify = app.add_subcommand("verify", "Check the Table 2 and Appendix D fixtures");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) {
            write_or_print(gen_out, instance_to_json(gen_src.load()) + "\n");
            return 0;
        }
        if (*solve) {
            const auto inst = dp_src.load();
            if (inst.state_count() > static_cast<double>(dp_limit)) {
                std::cerr << "solve-dp: " << inst.state_count() << " states exceeds --max-states\n";
                return 2;
            }
            IndexPolicy rule(inst, true);
            DpOptions options;
            options.max_states = dp_limit;
            const auto sol = policy_iteration(inst, tabulate(inst, rule, dp_limit), initial_state(inst), options);
            std::cout << "states " << sol.v.size() << "\n"
                      << "g* " << format_number(sol.g_star) << "\n"
                      << "u* " << format_number(reward_optimum(inst, sol)) << "\n"
                      << "iterations " << sol.iterations << "\n"
                      << "residual " << format_number(optimality_residual(inst, sol)) << "\n";
            if (!dp_out.empty()) write_or_print(dp_out, policy_to_json(inst, sol.policy) + "\n");
            return 0;
        }
        if (*sim) {
            const auto inst = sim_src.load();
            if (!dump_state.empty()) {
                std::cout << index_table_json(inst, parse_state(inst, dump_state)) << "\n";
                return 0;
            }
            const auto crn = make_crn(sim_crn_seed.value_or(inst.seed), sim_steps);
            const SystemState x0 = initial_state(inst);
            SimulationReport rep;
            if (sim_policy == "polling") {
                const auto result = best_polling_report(inst, x0, sim_steps, crn);
                rep = result.best_report();
                std::cerr << "best tour " << result.best_tour().label() << "\n";
            } else if (sim_policy == "passive") {
                PassivePolicy p;
                rep = simulate(inst, p, x0, sim_steps, crn);
            } else {
                IndexPolicy p(inst, sim_policy == "modified-index");
                rep = simulate(inst, p, x0, sim_steps, crn);
            }
            write_or_print(sim_out, rep.to_json() + "\n");
            return 0;
        }
        if (*opi) {
            const auto inst = opi_src.load();
            OpiBudget budget = opi_budget.budget();
            budget.r_on = opi_steps;
            const auto crn = make_crn(inst.seed, opi_steps);
            const auto result = run_opi(inst, budget, inst.seed, initial_state(inst), crn);
            std::cerr << "g_base " << format_number(result.preparatory.g_base) << ", reference "
                      << describe(result.preparatory.reference) << ", store "
                      << result.store.size() << " states\n";
            write_or_print(opi_out, result.online.report.to_json() + "\n");
            if (!opi_store_out.empty()) write_or_print(opi_store_out, result.store.to_json() + "\n");
            return 0;
        }
        if (*bench) {
            ExperimentConfig config =
                bench_budget.paper_scale ? ExperimentConfig::paper_scale() : ExperimentConfig{};
            for (std::uint64_t k = 0; k < bench_count; ++k) config.seeds.push_back(bench_seed + k);
            for (const auto& f : bench_files) config.instance_files.emplace_back(f);
            config.overrides = bench_pins.overrides();
            config.budget = bench_budget.budget();
            if (bench_steps) config.steps = *bench_steps;
            config.dp_state_limit = bench_dp_limit;
            config.threads = bench_threads;
            config.run_dp = !bench_no_dp;
            config.run_opi = !bench_no_opi;
            config.run_polling = !bench_no_polling;
            const auto records = run_benchmark(config);
            write_or_print(bench_out, records_csv(records));
            if (!bench_tables.empty()) write_or_print(bench_tables, report_tables(records).csv);
            int failed = 0;
            for (const auto& r : records) {
                if (!r.ok) {
                    ++failed;
                    std::cerr << r.instance << ": " << r.error << "\n";
                }
            }
            return failed ? 1 : 0;
        }
        if (*report) {
            const auto records = records_from_csv(read_file(report_in));
            std::vector<BucketKey> keys;
            for (const auto& k : report_keys) keys.push_back(bucket_key_from_string(k));
            const auto tables = keys.empty() ? report_tables(records) : report_tables(records, keys);
            std::cout << tables.text;
            if (!report_out.empty()) write_or_print(report_out, tables.csv);
            return 0;
        }
        if (*verify) {
            bool all = true;
            for (const auto& r : verify_all()) {
                std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " ("
                          << format_fixed(r.seconds, 2) << " s)\n"
                          << r.report << "\n";
                all = all && r.passed;
            }
            return all ? 0 : 1;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
