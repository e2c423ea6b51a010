#include "netrepair/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "netrepair/csv.hpp"
#include "netrepair/dp.hpp"
#include "netrepair/index_policy.hpp"
#include "netrepair/polling.hpp"

namespace netrepair {

ExperimentConfig ExperimentConfig::paper_scale() {
    ExperimentConfig c;
    c.steps = 500'000;
    c.budget = OpiBudget::paper_scale();
    return c;
}

void ExperimentConfig::validate() const {
    if (steps == 0) {
        throw std::invalid_argument("experiment: R_sim must be >= 1");
    }
    if (threads < 1) {
        throw std::invalid_argument("experiment: threads must be >= 1");
    }
    budget.validate();
}

double SuboptimalityRecord::cost_suboptimality(const PolicyOutcome& p) const {
    return 100.0 * (p.g - g_star) / g_star;
}

double SuboptimalityRecord::reward_suboptimality(const PolicyOutcome& p) const {
    return 100.0 * (u_star - p.u) / u_star;
}

double SuboptimalityRecord::opi_improvement_cost() const {
    return 100.0 * (index.g - opi.g) / index.g;
}

double SuboptimalityRecord::opi_improvement_reward() const {
    return 100.0 * (opi.u - index.u) / index.u;
}

// ---------------------------------------------------------------------------

SuboptimalityRecord run_instance(const InstanceParameters& inst, const ExperimentConfig& config) {
    SuboptimalityRecord rec;
    rec.instance = inst.label.empty() ? "seed-" + std::to_string(inst.seed) : inst.label;
    rec.seed = inst.seed;
    rec.machines = inst.machine_count();
    rec.cap = *std::max_element(inst.cap.begin(), inst.cap.end());
    rec.cost_kind = inst.cost.kind;
    rec.rho = inst.nominal_rho.value_or(inst.traffic_intensity());
    rec.eta = inst.switching_ratio();
    rec.states = inst.state_count();

    const SystemState x0 = initial_state(inst);
    const std::vector<double> crn = make_crn(inst.seed, config.steps);

    if (config.run_polling && rec.machines <= config.polling_machine_limit) {
        const auto result =
            best_polling_report(inst, x0, config.steps, crn, config.polling_machine_limit);
        rec.polling = {result.best_report().average_cost, result.best_report().average_reward};
        rec.polling_tour = result.best_tour().label();
    }
    if (config.run_index) {
        IndexPolicy policy(inst, false);
        const auto report = simulate(inst, policy, x0, config.steps, crn);
        rec.index = {report.average_cost, report.average_reward};
    }
    if (config.run_opi) {
        OpiBudget budget = config.budget;
        budget.r_on = config.steps;
        const auto result = run_opi(inst, budget, inst.seed, x0, crn);
        rec.opi = {result.online.report.average_cost, result.online.report.average_reward};
        rec.safe_fraction = result.online.report.safe_fraction();
    }
    if (config.run_dp && rec.states <= static_cast<double>(config.dp_state_limit)) {
        IndexPolicy rule(inst, true);
        const StationaryPolicy base = tabulate(inst, rule, config.dp_state_limit);
        DpOptions options;
        options.max_states = config.dp_state_limit;
        const DpSolution sol = policy_iteration(inst, base, x0, options);
        rec.dp = true;
        rec.g_star = sol.g_star;
        rec.u_star = reward_optimum(inst, sol);
    }
    return rec;
}

std::vector<SuboptimalityRecord> run_benchmark(const ExperimentConfig& config) {
    config.validate();
    struct Job {
        std::optional<std::uint64_t> seed;
        std::filesystem::path file;
    };
    std::vector<Job> jobs;
    for (auto seed : config.seeds) jobs.push_back({seed, {}});
    for (const auto& file : config.instance_files) jobs.push_back({std::nullopt, file});

    std::vector<SuboptimalityRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            const Job& job = jobs[k];
            try {
                const InstanceParameters inst = job.seed
                                                    ? generate_instance(*job.seed, config.overrides)
                                                    : load_instance(job.file);
                records[k] = run_instance(inst, config);
            } catch (const std::exception& e) {
                SuboptimalityRecord failed;
                failed.instance = job.seed ? "seed-" + std::to_string(*job.seed) : job.file.string();
                failed.seed = job.seed.value_or(0);
                failed.ok = false;
                failed.error = e.what();
                records[k] = std::move(failed);
            }
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), jobs.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    return records;
}

// ---------------------------------------------------------------------------

namespace {

const char* const kColumns[] = {
    "instance",          "seed",           "m",
    "K",                 "cost_kind",      "rho",
    "eta",               "states",         "dp",
    "g_star",            "u_star",         "polling_tour",
    "g_pol",             "u_pol",          "g_ind",
    "u_ind",             "g_opi",          "u_opi",
    "safe_fraction",     "cost_subopt_pol", "cost_subopt_ind",
    "cost_subopt_opi",   "reward_subopt_pol", "reward_subopt_ind",
    "reward_subopt_opi", "opi_improvement_cost", "opi_improvement_reward",
    "status",            "error",
};

std::string number_field(double v) { return std::isnan(v) ? "" : format_number(v); }

std::string quoted(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool in_quotes = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (in_quotes) {
            if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                fields.back() += '"';
                ++k;
            } else if (ch == '"') {
                in_quotes = false;
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else {
            fields.back() += ch;
        }
    }
    return fields;
}

double parse_field(const std::string& text) {
    if (text.empty()) return kMissing;
    if (text == "nan") return kMissing;
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    return parse_decimal(text);
}

}  // namespace

std::string records_csv(const std::vector<SuboptimalityRecord>& records) {
    std::ostringstream out;
    for (std::size_t k = 0; k < std::size(kColumns); ++k) {
        out << (k ? "," : "") << kColumns[k];
    }
    out << '\n';
    for (const auto& r : records) {
        const bool dp = r.ok && r.dp;
        auto sub = [&](double v) { return dp ? number_field(v) : std::string(); };
        const std::vector<std::string> row = {
            quoted(r.instance),
            std::to_string(r.seed),
            std::to_string(r.machines),
            std::to_string(r.cap),
            to_string(r.cost_kind),
            number_field(r.rho),
            number_field(r.eta),
            number_field(r.states),
            r.dp ? "1" : "0",
            number_field(r.g_star),
            number_field(r.u_star),
            quoted(r.polling_tour),
            number_field(r.polling.g),
            number_field(r.polling.u),
            number_field(r.index.g),
            number_field(r.index.u),
            number_field(r.opi.g),
            number_field(r.opi.u),
            number_field(r.safe_fraction),
            sub(r.cost_suboptimality(r.polling)),
            sub(r.cost_suboptimality(r.index)),
            sub(r.cost_suboptimality(r.opi)),
            sub(r.reward_suboptimality(r.polling)),
            sub(r.reward_suboptimality(r.index)),
            sub(r.reward_suboptimality(r.opi)),
            number_field(r.opi_improvement_cost()),
            number_field(r.opi_improvement_reward()),
            r.ok ? "ok" : "failed",
            quoted(r.error),
        };
        for (std::size_t k = 0; k < row.size(); ++k) {
            out << (k ? "," : "") << row[k];
        }
        out << '\n';
    }
    return out.str();
}

std::vector<SuboptimalityRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("records csv: empty input");
    }
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> column;
    for (std::size_t k = 0; k < header.size(); ++k) column[header[k]] = k;
    for (const char* name : kColumns) {
        if (!column.contains(name)) {
            throw std::invalid_argument(std::string("records csv: missing column '") + name + "'");
        }
    }
    std::vector<SuboptimalityRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            throw std::invalid_argument("records csv: line " + std::to_string(line_no) +
                                        " has the wrong number of fields");
        }
        auto get = [&](const char* name) -> const std::string& { return f[column.at(name)]; };
        try {
            SuboptimalityRecord r;
            r.instance = get("instance");
            r.seed = std::stoull(get("seed"));
            r.machines = std::stoi(get("m"));
            r.cap = std::stoi(get("K"));
            r.cost_kind = cost_kind_from_string(get("cost_kind"));
            r.rho = parse_field(get("rho"));
            r.eta = parse_field(get("eta"));
            r.states = parse_field(get("states"));
            r.dp = get("dp") == "1";
            r.g_star = parse_field(get("g_star"));
            r.u_star = parse_field(get("u_star"));
            r.polling_tour = get("polling_tour");
            r.polling = {parse_field(get("g_pol")), parse_field(get("u_pol"))};
            r.index = {parse_field(get("g_ind")), parse_field(get("u_ind"))};
            r.opi = {parse_field(get("g_opi")), parse_field(get("u_opi"))};
            r.safe_fraction = parse_field(get("safe_fraction"));
            r.ok = get("status") == "ok";
            r.error = get("error");
            out.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("records csv: line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(BucketKey key) {
    switch (key) {
        case BucketKey::Machines:
            return "m";
        case BucketKey::Rho:
            return "rho";
        case BucketKey::Eta:
            return "eta";
        case BucketKey::CostKind:
            return "cost";
        case BucketKey::Cap:
            return "K";
    }
    return "m";
}

BucketKey bucket_key_from_string(const std::string& text) {
    for (auto key : {BucketKey::Machines, BucketKey::Rho, BucketKey::Eta, BucketKey::CostKind,
                     BucketKey::Cap}) {
        if (to_string(key) == text) return key;
    }
    throw std::invalid_argument("unknown bucket key '" + text + "'");
}

namespace {

struct Range {
    double lo;
    double hi;
    const char* label;
};

const std::vector<Range>& rho_ranges() {
    static const std::vector<Range> r = {{0.1, 0.3, "0.1-0.3"}, {0.3, 0.5, "0.3-0.5"},
                                         {0.5, 0.7, "0.5-0.7"}, {0.7, 0.9, "0.7-0.9"},
                                         {0.9, 1.1, "0.9-1.1"}, {1.1, 1.3, "1.1-1.3"},
                                         {1.3, 1.5, "1.3-1.5"}};
    return r;
}

const std::vector<Range>& eta_ranges() {
    static const std::vector<Range> r = {{0.1, 0.4, "0.1-0.4"}, {0.4, 0.7, "0.4-0.7"},
                                         {0.7, 1.0, "0.7-1"},   {1.0, 4.0, "1-4"},
                                         {4.0, 7.0, "4-7"},     {7.0, 10.0, "7-10"}};
    return r;
}

std::optional<std::string> range_label(const std::vector<Range>& ranges, double v) {
    for (const auto& r : ranges) {
        if (v >= r.lo && v < r.hi) return std::string(r.label);
    }
    // the top edge belongs to the last bucket
    if (!ranges.empty() && v == ranges.back().hi) return std::string(ranges.back().label);
    return std::nullopt;
}

}  // namespace

std::optional<std::string> bucket_of(const SuboptimalityRecord& r, BucketKey key) {
    switch (key) {
        case BucketKey::Machines:
            return "m=" + std::to_string(r.machines);
        case BucketKey::Rho:
            return range_label(rho_ranges(), r.rho);
        case BucketKey::Eta:
            return range_label(eta_ranges(), r.eta);
        case BucketKey::CostKind:
            return to_string(r.cost_kind);
        case BucketKey::Cap:
            if (r.cap >= 1 && r.cap <= 5) return "K=" + std::to_string(r.cap);
            return std::nullopt;
    }
    return std::nullopt;
}

std::vector<std::string> bucket_labels(BucketKey key) {
    std::vector<std::string> out;
    switch (key) {
        case BucketKey::Machines:
            for (int m = 2; m <= 8; ++m) out.push_back("m=" + std::to_string(m));
            break;
        case BucketKey::Rho:
            for (const auto& r : rho_ranges()) out.emplace_back(r.label);
            break;
        case BucketKey::Eta:
            for (const auto& r : eta_ranges()) out.emplace_back(r.label);
            break;
        case BucketKey::CostKind:
            out = {"linear", "quadratic", "piecewise_linear"};
            break;
        case BucketKey::Cap:
            for (int k = 1; k <= 5; ++k) out.push_back("K=" + std::to_string(k));
            break;
    }
    return out;
}

Summary summarize(const std::vector<double>& values) {
    std::vector<double> v;
    for (double x : values) {
        if (!std::isnan(x)) v.push_back(x);
    }
    Summary s;
    s.n = v.size();
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() == 1) {
        s.half_width = 0.0;
        return s;
    }
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    s.half_width = kNormalQuantile975 * sd / std::sqrt(static_cast<double>(v.size()));
    return s;
}

double percentile(std::vector<double> values, double q) {
    std::erase_if(values, [](double x) { return std::isnan(x); });
    if (values.empty()) return kMissing;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct Metric {
    std::string name;
    std::string formulation;
    double (*value)(const SuboptimalityRecord&);
};

const std::vector<Metric>& metrics() {
    static const std::vector<Metric> list = {
        {"POL subopt", "cost", [](const SuboptimalityRecord& r) { return r.dp ? r.cost_suboptimality(r.polling) : kMissing; }},
        {"POL subopt", "reward", [](const SuboptimalityRecord& r) { return r.dp ? r.reward_suboptimality(r.polling) : kMissing; }},
        {"IND subopt", "cost", [](const SuboptimalityRecord& r) { return r.dp ? r.cost_suboptimality(r.index) : kMissing; }},
        {"IND subopt", "reward", [](const SuboptimalityRecord& r) { return r.dp ? r.reward_suboptimality(r.index) : kMissing; }},
        {"OPI subopt", "cost", [](const SuboptimalityRecord& r) { return r.dp ? r.cost_suboptimality(r.opi) : kMissing; }},
        {"OPI subopt", "reward", [](const SuboptimalityRecord& r) { return r.dp ? r.reward_suboptimality(r.opi) : kMissing; }},
        {"OPI imp. vs IND", "cost", [](const SuboptimalityRecord& r) { return r.opi_improvement_cost(); }},
        {"OPI imp. vs IND", "reward", [](const SuboptimalityRecord& r) { return r.opi_improvement_reward(); }},
        {"safe actions %", "-", [](const SuboptimalityRecord& r) { return 100.0 * r.safe_fraction; }},
    };
    return list;
}

std::string cell(const Summary& s) {
    if (s.n == 0) return "-";
    std::string out = format_fixed(s.mean, 2) + " +- " + format_fixed(s.half_width, 2);
    return out + " [" + std::to_string(s.n) + "]";
}

}  // namespace

ReportTables report_tables(const std::vector<SuboptimalityRecord>& all,
                           const std::vector<BucketKey>& keys) {
    if (all.empty()) {
        throw std::invalid_argument("report: no records");
    }
    std::vector<SuboptimalityRecord> records;
    std::size_t failed = 0;
    for (const auto& r : all) {
        if (r.ok) {
            records.push_back(r);
        } else {
            ++failed;
        }
    }

    std::ostringstream csv;
    std::ostringstream text;
    csv << "metric,formulation,bucket_key,bucket,n,mean,half_width\n";
    auto csv_row = [&](const Metric& metric, const std::string& key, const std::string& bucket,
                       const Summary& s) {
        csv << metric.name << ',' << metric.formulation << ',' << key << ',' << bucket << ','
            << s.n << ',' << number_field(s.mean) << ',' << number_field(s.half_width) << '\n';
    };

    text << "Instances: " << all.size() << " (" << failed << " failed)\n\n";
    text << "Overall (mean +- 1.96 SE [n]; percentiles 10/25/50/75/90)\n";
    for (const auto& metric : metrics()) {
        std::vector<double> v;
        for (const auto& r : records) v.push_back(metric.value(r));
        const Summary s = summarize(v);
        csv_row(metric, "all", "all", s);
        text << "  " << std::left << std::setw(16) << metric.name << std::setw(7)
             << metric.formulation << cell(s);
        if (s.n > 0) {
            text << "  |";
            for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
                text << ' ' << format_fixed(percentile(v, q), 2);
            }
        }
        text << '\n';
    }

    for (BucketKey key : keys) {
        const auto labels = bucket_labels(key);
        text << "\nBy " << to_string(key) << '\n';
        for (const auto& metric : metrics()) {
            text << "  " << std::left << std::setw(16) << metric.name << std::setw(7)
                 << metric.formulation;
            for (const auto& label : labels) {
                std::vector<double> v;
                for (const auto& r : records) {
                    if (bucket_of(r, key) == label) v.push_back(metric.value(r));
                }
                const Summary s = summarize(v);
                csv_row(metric, to_string(key), label, s);
                if (s.n > 0) text << "  " << label << ": " << cell(s);
            }
            text << '\n';
        }
    }
    return {csv.str(), text.str()};
}

}  // namespace netrepair
