#include <cmath>

#include "doctest.h"
#include "netrepair/experiments.hpp"

using namespace netrepair;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.seeds = {0, 1, 2, 3};
    config.overrides.machines = 2;
    config.overrides.cap = 2;
    config.steps = 3'000;
    config.budget.r2 = 5'000;
    config.budget.r_off = 100;
    config.budget.tau_max_steps = 5'000;
    return config;
}

}  // namespace

TEST_CASE("suboptimality formulas") {
    SuboptimalityRecord r;
    r.g_star = 2.0;
    r.u_star = 4.0;
    r.index = {2.5, 3.0};
    r.opi = {2.2, 3.5};
    CHECK(r.cost_suboptimality(r.index) == doctest::Approx(25.0));
    CHECK(r.reward_suboptimality(r.index) == doctest::Approx(25.0));
    CHECK(r.opi_improvement_cost() == doctest::Approx(100.0 * 0.3 / 2.5));
    CHECK(r.opi_improvement_reward() == doctest::Approx(100.0 * 0.5 / 3.0));
    CHECK(std::isnan(r.cost_suboptimality(r.polling)));
}

TEST_CASE("buckets") {
    SuboptimalityRecord r;
    r.machines = 3;
    r.cap = 2;
    r.cost_kind = CostKind::Quadratic;
    r.rho = 0.3;
    r.eta = 10.0;
    CHECK(bucket_of(r, BucketKey::Machines) == "m=3");
    CHECK(bucket_of(r, BucketKey::Cap) == "K=2");
    CHECK(bucket_of(r, BucketKey::CostKind) == "quadratic");
    CHECK(bucket_of(r, BucketKey::Rho) == "0.3-0.5");
    CHECK(bucket_of(r, BucketKey::Eta) == "7-10");
    r.rho = 1.6;
    CHECK_FALSE(bucket_of(r, BucketKey::Rho).has_value());
    r.eta = 0.7;
    CHECK(bucket_of(r, BucketKey::Eta) == "0.7-1");
    CHECK(bucket_labels(BucketKey::Rho).size() == 7);
    CHECK(bucket_labels(BucketKey::Eta).size() == 6);
    CHECK(bucket_labels(BucketKey::Machines).front() == "m=2");
    for (auto key : {BucketKey::Machines, BucketKey::Rho, BucketKey::Eta, BucketKey::CostKind, BucketKey::Cap}) {
        CHECK(bucket_key_from_string(to_string(key)) == key);
    }
    CHECK_THROWS_AS(bucket_key_from_string("colour"), std::invalid_argument);
}

TEST_CASE("summaries and percentiles") {
    const auto s = summarize({1.0, 2.0, 3.0, kMissing});
    CHECK(s.n == 3);
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.half_width == doctest::Approx(1.96 / std::sqrt(3.0)));
    CHECK(summarize({5.0}).half_width == 0.0);
    CHECK(summarize({}).n == 0);
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.25) == doctest::Approx(1.75));
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5));
    CHECK(percentile({7.0}, 0.9) == 7.0);
    CHECK(std::isnan(percentile({}, 0.5)));
}

TEST_CASE("benchmark output is deterministic and round trips") {
    auto config = small_config();
    const auto a = run_benchmark(config);
    config.threads = 3;
    const auto b = run_benchmark(config);
    REQUIRE(a.size() == 4);
    CHECK(records_csv(a) == records_csv(b));
    for (const auto& r : a) {
        CHECK(r.ok);
        CHECK(r.dp);
        const auto inst = generate_instance(r.seed, config.overrides);
        CHECK(r.g_star + r.u_star == doctest::Approx(inst.failed_cost_total()));
        CHECK(std::isfinite(r.cost_suboptimality(r.index)));
        CHECK_FALSE(r.polling_tour.empty());
    }
    const auto back = records_from_csv(records_csv(a));
    CHECK(records_csv(back) == records_csv(a));

    const auto tables = report_tables(a);
    CHECK(tables.csv.rfind("metric,formulation,bucket_key,bucket,n,mean,half_width\n", 0) == 0);
    CHECK_FALSE(tables.text.empty());
    CHECK_THROWS_AS(report_tables({}), std::invalid_argument);
}

TEST_CASE("a failing instance does not stop the batch") {
    auto config = small_config();
    config.seeds = {5};
    config.instance_files = {"/nonexistent/instance.json"};
    const auto records = run_benchmark(config);
    REQUIRE(records.size() == 2);
    CHECK(records[0].ok);
    CHECK_FALSE(records[1].ok);
    CHECK_FALSE(records[1].error.empty());
    const auto back = records_from_csv(records_csv(records));
    CHECK_FALSE(back[1].ok);
}

TEST_CASE("configuration checks") {
    ExperimentConfig config;
    CHECK_NOTHROW(config.validate());
    config.steps = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.steps = 10;
    config.threads = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    const auto paper = ExperimentConfig::paper_scale();
    CHECK(paper.steps == 500'000);
    CHECK(paper.budget.mode == BudgetMode::WallClock);
}

TEST_CASE("instances over the state limit skip dynamic programming") {
    auto config = small_config();
    config.seeds = {0};
    config.dp_state_limit = 10;
    config.run_opi = false;
    const auto records = run_benchmark(config);
    REQUIRE(records.size() == 1);
    CHECK(records[0].ok);
    CHECK_FALSE(records[0].dp);
    CHECK(std::isnan(records[0].g_star));
}
