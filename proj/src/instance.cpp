#include "netrepair/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "netrepair/rng.hpp"

namespace netrepair {

using nlohmann::json;

std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::Linear:
            return "linear";
        case CostKind::Quadratic:
            return "quadratic";
        case CostKind::PiecewiseLinear:
            return "piecewise_linear";
    }
    return "linear";
}

CostKind cost_kind_from_string(const std::string& text) {
    if (text == "linear") return CostKind::Linear;
    if (text == "quadratic") return CostKind::Quadratic;
    if (text == "piecewise_linear") return CostKind::PiecewiseLinear;
    throw std::invalid_argument("unknown cost kind '" + text + "'");
}

double CostModel::rate(int machine, int level, int cap) const {
    const double ci = c[machine];
    const double x = level;
    switch (kind) {
        case CostKind::Linear:
            return ci * x;
        case CostKind::Quadratic:
            return ci * x * x;
        case CostKind::PiecewiseLinear:
            return ci * (x + (level == cap ? 10.0 : 0.0));
    }
    return 0.0;
}

double InstanceParameters::failed_cost_total() const {
    double total = 0.0;
    for (int j = 0; j < machine_count(); ++j) {
        total += cost_rate(j, cap[j]);
    }
    return total;
}

double InstanceParameters::uniformization_rate() const {
    const double degrade = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    const double fastest = std::max(*std::max_element(mu.begin(), mu.end()), tau);
    return degrade + fastest;
}

double InstanceParameters::traffic_intensity() const {
    double rho = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        rho += lambda[j] / mu[j];
    }
    return rho;
}

double InstanceParameters::switching_ratio() const {
    return tau / std::accumulate(lambda.begin(), lambda.end(), 0.0);
}

double InstanceParameters::state_count() const {
    double count = layout.node_count();
    for (int k : cap) {
        count *= static_cast<double>(k + 1);
    }
    return count;
}

void InstanceParameters::validate() const {
    const auto m = static_cast<std::size_t>(machine_count());
    if (m == 0) {
        throw std::invalid_argument("instance: no machines");
    }
    if (lambda.size() != m || mu.size() != m || cap.size() != m || cost.c.size() != m) {
        throw std::invalid_argument("instance: per-machine arrays must have one entry per machine");
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (!(lambda[j] > 0.0) || !std::isfinite(lambda[j])) {
            throw std::invalid_argument("instance: lambda[" + std::to_string(j) + "] must be positive");
        }
        if (!(mu[j] > 0.0) || !std::isfinite(mu[j])) {
            throw std::invalid_argument("instance: mu[" + std::to_string(j) + "] must be positive");
        }
        if (cap[j] < 1) {
            throw std::invalid_argument("instance: K[" + std::to_string(j) + "] must be >= 1");
        }
        if (!(cost.c[j] > 0.0) || !std::isfinite(cost.c[j])) {
            throw std::invalid_argument("instance: c[" + std::to_string(j) + "] must be positive");
        }
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("instance: tau must be positive");
    }
    const double big_lambda = uniformization_rate();
    if (!std::isfinite(big_lambda) || !(big_lambda > 0.0)) {
        throw std::invalid_argument("instance: uniformization rate is not finite");
    }
}

double round_two_significant(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument("round_two_significant: value must be positive and finite");
    }
    int exponent = static_cast<int>(std::floor(std::log10(value))) - 1;
    double mantissa = value / std::pow(10.0, exponent);
    // log10 can land one off at exact powers of ten
    if (mantissa >= 100.0) {
        ++exponent;
        mantissa = value / std::pow(10.0, exponent);
    } else if (mantissa < 10.0) {
        --exponent;
        mantissa = value / std::pow(10.0, exponent);
    }
    long digits = std::lrint(mantissa);  // default rounding mode: ties to even
    if (digits == 100) {
        digits = 10;
        ++exponent;
    }
    // go through decimal text so 0.12 comes back as the double nearest 0.12
    return parse_decimal(std::to_string(digits) + "e" + std::to_string(exponent));
}

InstanceParameters generate_instance(std::uint64_t seed, const GenerateOverrides& overrides) {
    Rng rng(seed, Stream::Instance);

    const int kind_draw = rng.integer(1, 3);
    const int cap_draw = rng.integer(1, 5);
    const int m_draw = rng.integer(2, 8);

    const CostKind kind = overrides.cost_kind.value_or(static_cast<CostKind>(kind_draw - 1));
    const int K = overrides.cap.value_or(cap_draw);
    const int m = overrides.machines.value_or(m_draw);
    constexpr int kGrid = 5;
    if (m < 1 || m > kGrid * kGrid) {
        throw std::invalid_argument("generate_instance: machine count must be in 1..25");
    }
    if (K < 1) {
        throw std::invalid_argument("generate_instance: K must be >= 1");
    }

    // a colliding machine redraws only its own coordinates
    std::vector<LatticePoint> coords;
    std::set<LatticePoint> taken;
    for (int i = 0; i < m; ++i) {
        LatticePoint p;
        do {
            p.a = rng.integer(1, kGrid);
            p.b = rng.integer(1, kGrid);
        } while (taken.contains(p));
        taken.insert(p);
        coords.push_back(p);
    }

    const double rho = rng.uniform(0.1, 1.5);
    std::vector<double> mu(m), lambda_initial(m), lambda(m), c(m);
    for (int i = 0; i < m; ++i) {
        mu[i] = rng.uniform(0.1, 0.9);
    }
    for (int i = 0; i < m; ++i) {
        lambda_initial[i] = rng.uniform(0.1 * mu[i], mu[i]);
    }
    double ratio_total = 0.0;
    for (int i = 0; i < m; ++i) {
        ratio_total += lambda_initial[i] / mu[i];
    }
    for (int i = 0; i < m; ++i) {
        const double rho_i = (lambda_initial[i] / mu[i]) / ratio_total * rho;
        lambda[i] = rho_i * mu[i];
    }
    for (int i = 0; i < m; ++i) {
        c[i] = rng.uniform(0.1, 0.9);
    }
    const double branch = rng.uniform();
    const double eta = branch < 0.5 ? rng.uniform(0.1, 1.0) : rng.uniform(1.0, 10.0);

    // machines are renumbered by (a, b); carry each machine's parameters along
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return coords[x] < coords[y]; });

    InstanceParameters inst;
    std::vector<LatticePoint> sorted_coords;
    for (int idx : order) {
        sorted_coords.push_back(coords[idx]);
        inst.lambda.push_back(round_two_significant(lambda[idx]));
        inst.mu.push_back(round_two_significant(mu[idx]));
        inst.cost.c.push_back(c[idx]);
    }
    inst.layout = build_lattice_layout(kGrid, sorted_coords);
    inst.cap.assign(m, K);
    inst.cost.kind = kind;
    inst.tau = eta * std::accumulate(inst.lambda.begin(), inst.lambda.end(), 0.0);
    inst.seed = seed;
    inst.nominal_rho = rho;
    inst.label = "seed-" + std::to_string(seed);
    inst.validate();
    return inst;
}

namespace {

InstanceParameters make_instance(NetworkLayout layout, std::vector<double> lambda,
                                 std::vector<double> mu, double tau, std::vector<int> cap,
                                 std::vector<double> c, std::string label) {
    InstanceParameters inst;
    inst.layout = std::move(layout);
    inst.lambda = std::move(lambda);
    inst.mu = std::move(mu);
    inst.tau = tau;
    inst.cap = std::move(cap);
    inst.cost = CostModel{CostKind::Linear, std::move(c)};
    inst.label = std::move(label);
    inst.validate();
    return inst;
}

}  // namespace

InstanceParameters example1_instance() {
    return make_instance(build_complete_layout(2), {0.4, 0.4}, {1.1, 1.0}, 100.0, {2, 2}, {1.0, 1.0},
                         "example-1");
}

std::vector<InstanceParameters> appendix_d_instances() {
    std::vector<InstanceParameters> out;
    out.push_back(make_instance(build_star_layout(3, 1), {0.04, 0.04, 0.04}, {0.12, 0.12, 0.12},
                                0.024, {1, 1, 1}, {1, 1, 1}, "appendix-d-a"));
    out.push_back(make_instance(build_complete_layout(3), {0.089, 0.089, 0.089}, {0.52, 0.52, 0.52},
                                0.11, {2, 2, 2}, {1, 1, 1}, "appendix-d-b"));
    out.push_back(make_instance(build_complete_layout(3), {0.034, 0.16, 0.055}, {0.74, 0.74, 0.74},
                                0.22, {1, 1, 1}, {1, 1, 1}, "appendix-d-c1"));
    out.push_back(make_instance(build_complete_layout(3), {0.056, 0.056, 0.056}, {0.82, 0.12, 0.63},
                                0.15, {1, 1, 1}, {1, 1, 1}, "appendix-d-c2"));
    out.push_back(make_instance(build_complete_layout(3), {0.14, 0.14, 0.14}, {0.56, 0.56, 0.56},
                                0.36, {1, 1, 1}, {8.6, 13.0, 8.1}, "appendix-d-c3"));
    return out;
}

InstanceParameters homogeneous_complete_instance(int machines, double lambda, double mu, double tau,
                                                 double c) {
    const auto m = static_cast<std::size_t>(machines);
    return make_instance(build_complete_layout(machines), std::vector<double>(m, lambda),
                         std::vector<double>(m, mu), tau, std::vector<int>(m, 1),
                         std::vector<double>(m, c), "complete-homogeneous");
}

InstanceParameters homogeneous_star_instance(int machines, int radius, double lambda, double mu,
                                             double tau, double c) {
    const auto m = static_cast<std::size_t>(machines);
    return make_instance(build_star_layout(machines, radius), std::vector<double>(m, lambda),
                         std::vector<double>(m, mu), tau, std::vector<int>(m, 1),
                         std::vector<double>(m, c), "star-homogeneous");
}

std::string exact_decimal(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

double parse_decimal(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc{} || result.ptr != last) {
        throw std::invalid_argument("not a decimal number: '" + text + "'");
    }
    return value;
}

// ---------------------------------------------------------------------------
// JSON persistence

namespace {

json decimals(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) {
        out.push_back(exact_decimal(v));
    }
    return out;
}

const json& require(const json& node, const std::string& key, const std::string& path) {
    if (!node.is_object() || !node.contains(key)) {
        throw SchemaError(path + key + ": missing field");
    }
    return node.at(key);
}

double read_decimal(const json& node, const std::string& path) {
    if (!node.is_string()) {
        throw SchemaError(path + ": expected decimal string");
    }
    try {
        return parse_decimal(node.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

std::vector<double> read_decimals(const json& node, const std::string& path) {
    if (!node.is_array()) {
        throw SchemaError(path + ": expected array");
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < node.size(); ++k) {
        out.push_back(read_decimal(node[k], path + "[" + std::to_string(k) + "]"));
    }
    return out;
}

int read_int(const json& node, const std::string& path) {
    if (!node.is_number_integer()) {
        throw SchemaError(path + ": expected integer");
    }
    return node.get<int>();
}

}  // namespace

std::string instance_to_json(const InstanceParameters& inst) {
    json doc;
    doc["schema_version"] = kInstanceSchemaVersion;
    doc["label"] = inst.label;
    doc["seed"] = inst.seed;
    const auto& layout = inst.layout;
    if (layout.grid_side()) {
        doc["grid"] = *layout.grid_side();
        json coords = json::array();
        for (int j = 0; j < layout.machine_count(); ++j) {
            coords.push_back({layout.coordinates()[j].a, layout.coordinates()[j].b});
        }
        doc["machine_coords"] = coords;
    } else {
        doc["grid"] = nullptr;
        doc["machine_coords"] = nullptr;
    }
    json adjacency = json::array();
    for (const auto& row : layout.adjacency()) {
        json labels = json::array();
        for (NodeId v : row) {
            labels.push_back(v + 1);
        }
        adjacency.push_back(labels);
    }
    doc["adjacency"] = adjacency;
    doc["lambda"] = decimals(inst.lambda);
    doc["mu"] = decimals(inst.mu);
    doc["tau"] = exact_decimal(inst.tau);
    doc["K"] = inst.cap;
    doc["cost"] = {{"kind", to_string(inst.cost.kind)}, {"c", decimals(inst.cost.c)}};
    if (inst.nominal_rho) {
        doc["rho_nominal"] = exact_decimal(*inst.nominal_rho);
    }
    return doc.dump(2);
}

InstanceParameters instance_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("$: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw SchemaError("$: expected object");
    }
    const int version = read_int(require(doc, "schema_version", "$."), "$.schema_version");
    if (version != kInstanceSchemaVersion) {
        throw SchemaError("$.schema_version: unsupported version " + std::to_string(version));
    }

    InstanceParameters inst;
    if (doc.contains("label") && doc["label"].is_string()) {
        inst.label = doc["label"].get<std::string>();
    }
    const auto& seed = require(doc, "seed", "$.");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
        throw SchemaError("$.seed: expected integer");
    }
    inst.seed = seed.get<std::uint64_t>();
    inst.lambda = read_decimals(require(doc, "lambda", "$."), "$.lambda");
    inst.mu = read_decimals(require(doc, "mu", "$."), "$.mu");
    inst.tau = read_decimal(require(doc, "tau", "$."), "$.tau");
    const auto& caps = require(doc, "K", "$.");
    if (!caps.is_array()) {
        throw SchemaError("$.K: expected array");
    }
    for (std::size_t k = 0; k < caps.size(); ++k) {
        inst.cap.push_back(read_int(caps[k], "$.K[" + std::to_string(k) + "]"));
    }
    const auto& cost = require(doc, "cost", "$.");
    const auto& kind = require(cost, "kind", "$.cost.");
    if (!kind.is_string()) {
        throw SchemaError("$.cost.kind: expected string");
    }
    try {
        inst.cost.kind = cost_kind_from_string(kind.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("$.cost.kind: ") + e.what());
    }
    inst.cost.c = read_decimals(require(cost, "c", "$.cost."), "$.cost.c");
    if (doc.contains("rho_nominal")) {
        inst.nominal_rho = read_decimal(doc["rho_nominal"], "$.rho_nominal");
    }

    const auto m = static_cast<int>(inst.lambda.size());
    const auto& adjacency = require(doc, "adjacency", "$.");
    if (!adjacency.is_array()) {
        throw SchemaError("$.adjacency: expected array");
    }
    std::vector<std::vector<NodeId>> adj(adjacency.size());
    for (std::size_t u = 0; u < adjacency.size(); ++u) {
        const std::string path = "$.adjacency[" + std::to_string(u) + "]";
        if (!adjacency[u].is_array()) {
            throw SchemaError(path + ": expected array");
        }
        for (std::size_t k = 0; k < adjacency[u].size(); ++k) {
            adj[u].push_back(read_int(adjacency[u][k], path + "[" + std::to_string(k) + "]") - 1);
        }
    }

    const auto& grid = require(doc, "grid", "$.");
    try {
        if (grid.is_null()) {
            inst.layout = NetworkLayout(m, std::move(adj));
        } else {
            const int side = read_int(grid, "$.grid");
            const auto& coords = require(doc, "machine_coords", "$.");
            if (!coords.is_array() || static_cast<int>(coords.size()) != m) {
                throw SchemaError("$.machine_coords: expected one [a, b] pair per machine");
            }
            std::vector<LatticePoint> points;
            for (std::size_t k = 0; k < coords.size(); ++k) {
                const std::string path = "$.machine_coords[" + std::to_string(k) + "]";
                if (!coords[k].is_array() || coords[k].size() != 2) {
                    throw SchemaError(path + ": expected [a, b]");
                }
                points.push_back({read_int(coords[k][0], path + "[0]"), read_int(coords[k][1], path + "[1]")});
            }
            if (!std::is_sorted(points.begin(), points.end())) {
                throw SchemaError("$.machine_coords: machines must be ordered by (a, b)");
            }
            inst.layout = build_lattice_layout(side, points);
            NetworkLayout stated(m, std::move(adj));
            if (stated.adjacency() != inst.layout.adjacency()) {
                throw SchemaError("$.adjacency: does not match the lattice built from grid/machine_coords");
            }
        }
        inst.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("$: ") + e.what());
    }
    return inst;
}

void save_instance(const InstanceParameters& inst, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << instance_to_json(inst) << '\n';
}

InstanceParameters load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return instance_from_json(buffer.str());
}

}  // namespace netrepair
