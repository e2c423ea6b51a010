#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "netrepair/instance.hpp"
#include "netrepair/opi.hpp"

namespace netrepair {

inline constexpr std::uint64_t kDefaultDpStateLimit = 200'000;

struct ExperimentConfig {
    std::vector<std::uint64_t> seeds;                   // generated instances
    std::vector<std::filesystem::path> instance_files;  // loaded instances, run after the seeds
    GenerateOverrides overrides;
    bool run_polling = true;
    bool run_index = true;
    bool run_opi = true;
    bool run_dp = true;
    std::uint64_t steps = 50'000;  // R_sim, also the OPI online horizon
    OpiBudget budget = OpiBudget::desk_scale();
    std::uint64_t dp_state_limit = kDefaultDpStateLimit;
    int polling_machine_limit = 4;
    int threads = 1;

    /// Appendix H budgets: R_sim = 500,000 and wall-clock OPI budgets.
    static ExperimentConfig paper_scale();
    void validate() const;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct PolicyOutcome {
    double g = kMissing;
    double u = kMissing;
};

struct SuboptimalityRecord {
    std::string instance;
    std::uint64_t seed = 0;
    int machines = 0;
    int cap = 0;  // largest K_j
    CostKind cost_kind = CostKind::Linear;
    double rho = kMissing;
    double eta = kMissing;
    double states = 0.0;

    bool dp = false;
    double g_star = kMissing;
    double u_star = kMissing;
    PolicyOutcome polling;
    std::string polling_tour;
    PolicyOutcome index;
    PolicyOutcome opi;
    double safe_fraction = kMissing;

    bool ok = true;
    std::string error;

    /// 100 (g - g*) / g*.
    double cost_suboptimality(const PolicyOutcome& p) const;
    /// 100 (u* - u) / u*.
    double reward_suboptimality(const PolicyOutcome& p) const;
    /// 100 (g_IND - g_OPI) / g_IND.
    double opi_improvement_cost() const;
    /// 100 (u_OPI - u_IND) / u_IND.
    double opi_improvement_reward() const;
};

/// Runs every configured instance. A failing instance yields a record with
/// ok = false and the error text; the batch continues.
std::vector<SuboptimalityRecord> run_benchmark(const ExperimentConfig& config);

/// Runs one instance on the shared common random numbers of its seed.
SuboptimalityRecord run_instance(const InstanceParameters& inst, const ExperimentConfig& config);

/// One row per record, in input order. Missing values are empty fields.
std::string records_csv(const std::vector<SuboptimalityRecord>& records);
std::vector<SuboptimalityRecord> records_from_csv(const std::string& text);

enum class BucketKey { Machines, Rho, Eta, CostKind, Cap };

std::string to_string(BucketKey key);
BucketKey bucket_key_from_string(const std::string& text);

/// Bucket label of a record ("0.1-0.4", "m=3", "Quadratic", ...), or
/// std::nullopt when the value lies outside every bucket.
std::optional<std::string> bucket_of(const SuboptimalityRecord& record, BucketKey key);
/// All labels of a key, in table order.
std::vector<std::string> bucket_labels(BucketKey key);

struct Summary {
    std::size_t n = 0;
    double mean = kMissing;
    double half_width = kMissing;  // 1.96 standard errors; 0 when n = 1
};

/// Ignores NaN values.
Summary summarize(const std::vector<double>& values);
/// Linear interpolation between order statistics; NaN values ignored.
double percentile(std::vector<double> values, double q);

struct ReportTables {
    std::string csv;   // metric,formulation,bucket_key,bucket,n,mean,half_width
    std::string text;  // human-readable tables
};

/// Throws std::invalid_argument for an empty record list.
ReportTables report_tables(const std::vector<SuboptimalityRecord>& records,
                           const std::vector<BucketKey>& keys = {BucketKey::Machines, BucketKey::Rho,
                                                                 BucketKey::Eta, BucketKey::CostKind,
                                                                 BucketKey::Cap});

}  // namespace netrepair
