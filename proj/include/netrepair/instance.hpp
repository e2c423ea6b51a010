#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrepair/network.hpp"

namespace netrepair {

enum class CostKind { Linear, Quadratic, PiecewiseLinear };

std::string to_string(CostKind kind);
CostKind cost_kind_from_string(const std::string& text);

/// Per-machine cost rate f_i. All kinds satisfy f_i(0) = 0 and are strictly
/// increasing for c_i > 0.
struct CostModel {
    CostKind kind = CostKind::Linear;
    std::vector<double> c;

    double rate(int machine, int level, int cap) const;
    friend bool operator==(const CostModel&, const CostModel&) = default;
};

/// One problem instance. Rates are per unit of continuous time; the
/// uniformized chain divides them by uniformization_rate().
struct InstanceParameters {
    NetworkLayout layout;
    std::vector<double> lambda;  // degradation rates
    std::vector<double> mu;      // repair rates
    double tau = 1.0;            // switching rate per edge
    std::vector<int> cap;        // K_i, the failed level
    CostModel cost;
    std::uint64_t seed = 0;
    /// Traffic intensity drawn before 2-significant-figure rounding, when generated.
    std::optional<double> nominal_rho;
    std::string label;

    int machine_count() const { return layout.machine_count(); }
    double cost_rate(int machine, int level) const { return cost.rate(machine, level, cap[machine]); }
    /// Sum of f_j(K_j): the average cost of never repairing anything.
    double failed_cost_total() const;
    /// Sum of lambda_j + max(mu_1..mu_m, tau).
    double uniformization_rate() const;
    /// rho = sum lambda_i / mu_i.
    double traffic_intensity() const;
    /// eta = tau / sum lambda_i.
    double switching_ratio() const;
    /// |V| * prod (K_j + 1).
    double state_count() const;

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;

    friend bool operator==(const InstanceParameters&, const InstanceParameters&) = default;
};

/// Fields that can be pinned when sampling an instance.
struct GenerateOverrides {
    std::optional<int> machines;
    std::optional<int> cap;
    std::optional<CostKind> cost_kind;
};

/// Random instance on the 5x5 lattice. Every draw is taken even when
/// overridden, so pinning one field leaves the others unchanged for a seed.
InstanceParameters generate_instance(std::uint64_t seed, const GenerateOverrides& overrides = {});

/// Round to two significant figures, ties to even on the decimal mantissa.
double round_two_significant(double value);

/// Two machines joined by one edge; the top-priority counterexample.
InstanceParameters example1_instance();

/// Five three-machine instances where the index policy is not optimal, in the
/// order (a) star, (b) K=2, (c1) lambda, (c2) mu, (c3) cost heterogeneity.
std::vector<InstanceParameters> appendix_d_instances();

/// Homogeneous K=1 instance on a complete graph (index policy is optimal here).
InstanceParameters homogeneous_complete_instance(int machines, double lambda, double mu, double tau,
                                                 double c);
/// Homogeneous K=1 instance on a star network.
InstanceParameters homogeneous_star_instance(int machines, int radius, double lambda, double mu,
                                             double tau, double c);

inline constexpr int kInstanceSchemaVersion = 1;

/// Raised for unreadable or non-conforming instance files; what() starts with
/// the offending field path.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string instance_to_json(const InstanceParameters& inst);
InstanceParameters instance_from_json(const std::string& text);
void save_instance(const InstanceParameters& inst, const std::filesystem::path& path);
InstanceParameters load_instance(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string exact_decimal(double value);
double parse_decimal(const std::string& text);

}  // namespace netrepair
