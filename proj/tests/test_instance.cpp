#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "netrepair/instance.hpp"

using namespace netrepair;

TEST_CASE("cost kinds evaluate as defined") {
    CostModel linear{CostKind::Linear, {0.5}};
    CostModel quad{CostKind::Quadratic, {0.5}};
    CostModel piece{CostKind::PiecewiseLinear, {0.5}};
    CHECK(linear.rate(0, 3, 4) == doctest::Approx(1.5));
    CHECK(quad.rate(0, 3, 4) == doctest::Approx(4.5));
    CHECK(piece.rate(0, 3, 4) == doctest::Approx(1.5));
    CHECK(piece.rate(0, 4, 4) == doctest::Approx(7.0));
    for (const auto& model : {linear, quad, piece}) {
        CHECK(model.rate(0, 0, 4) == 0.0);
        for (int x = 1; x <= 4; ++x) CHECK(model.rate(0, x, 4) > model.rate(0, x - 1, 4));
    }
}

TEST_CASE("example 1 instance") {
    const auto inst = example1_instance();
    CHECK(inst.machine_count() == 2);
    CHECK(inst.layout.node_count() == 2);
    CHECK(inst.traffic_intensity() == doctest::Approx(0.4 / 1.1 + 0.4 / 1.0));
    CHECK(inst.uniformization_rate() == doctest::Approx(100.8));
    CHECK(inst.cost_rate(0, 2) == doctest::Approx(2.0));
    CHECK(inst.state_count() == 18.0);
}

TEST_CASE("appendix D instances") {
    const auto cases = appendix_d_instances();
    REQUIRE(cases.size() == 5);
    const auto& a = cases[0];
    CHECK(a.layout.node_count() == 4);
    CHECK(a.tau < 2 * 1 * a.lambda[0]);
    for (int k : cases[1].cap) CHECK(k == 2);
    const auto& c3 = cases[4];
    CHECK(c3.lambda == std::vector<double>(3, 0.14));
    CHECK(c3.mu == std::vector<double>(3, 0.56));
    CHECK(c3.cost.c == std::vector<double>{8.6, 13.0, 8.1});
    CHECK(cases[3].mu == std::vector<double>{0.82, 0.12, 0.63});
}

TEST_CASE("two significant figure rounding") {
    CHECK(round_two_significant(0.1234) == 0.12);
    CHECK(round_two_significant(0.0456) == 0.046);
    CHECK(round_two_significant(0.125) == 0.12);
    CHECK(round_two_significant(0.135) == 0.14);
    CHECK(round_two_significant(0.995) == 1.0);
    CHECK(round_two_significant(7.25) == 7.2);
}

TEST_CASE("generated instances satisfy every invariant over 10000 seeds") {
    int out_of_order = 0;
    for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
        const auto inst = generate_instance(seed);
        REQUIRE_NOTHROW(inst.validate());
        const int m = inst.machine_count();
        REQUIRE(m >= 2);
        REQUIRE(m <= 8);
        REQUIRE(inst.layout.node_count() == 25);
        const double eta = inst.switching_ratio();
        REQUIRE(eta >= 0.1 - 1e-12);
        REQUIRE(eta <= 10.0 + 1e-12);
        // each rate moves by at most 5% under 2-significant-figure rounding
        const double rho = inst.traffic_intensity();
        REQUIRE(rho >= 0.1 * 0.95 / 1.05);
        REQUIRE(rho <= 1.5 * 1.05 / 0.95);
        REQUIRE(inst.nominal_rho.has_value());
        REQUIRE(*inst.nominal_rho >= 0.1);
        REQUIRE(*inst.nominal_rho < 1.5);
        const int K = inst.cap[0];
        REQUIRE(K >= 1);
        REQUIRE(K <= 5);
        std::set<LatticePoint> coords;
        for (int j = 0; j < m; ++j) {
            REQUIRE(inst.cap[j] == K);
            REQUIRE(inst.mu[j] >= 0.1);
            REQUIRE(inst.mu[j] <= 0.9);
            REQUIRE(inst.cost.c[j] >= 0.1);
            REQUIRE(inst.cost.c[j] <= 0.9);
            REQUIRE(round_two_significant(inst.lambda[j]) == inst.lambda[j]);
            REQUIRE(round_two_significant(inst.mu[j]) == inst.mu[j]);
            coords.insert(inst.layout.coordinates()[j]);
            if (j > 0 && !(inst.layout.coordinates()[j - 1] < inst.layout.coordinates()[j])) ++out_of_order;
        }
        REQUIRE(coords.size() == static_cast<std::size_t>(m));
        double lambda_total = 0.0;
        for (double l : inst.lambda) lambda_total += l;
        REQUIRE(inst.tau == doctest::Approx(eta * lambda_total));
        const double rate = inst.uniformization_rate();
        double biggest = inst.tau;
        for (double mu : inst.mu) biggest = std::max(biggest, mu);
        REQUIRE(rate == doctest::Approx(lambda_total + biggest));
    }
    CHECK(out_of_order == 0);
}

TEST_CASE("generation is a pure function of the seed") {
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 123456789ull}) {
        CHECK(generate_instance(seed) == generate_instance(seed));
    }
    CHECK_FALSE(generate_instance(1) == generate_instance(2));
}

TEST_CASE("overrides pin fields without disturbing the others") {
    GenerateOverrides pins;
    pins.machines = 2;
    pins.cap = 1;
    const auto inst = generate_instance(9, pins);
    CHECK(inst.machine_count() == 2);
    CHECK(inst.cap == std::vector<int>{1, 1});
    CHECK(inst.state_count() == 25.0 * 4.0);

    GenerateOverrides kind_only;
    kind_only.cost_kind = CostKind::Quadratic;
    const auto free = generate_instance(9);
    const auto pinned = generate_instance(9, kind_only);
    CHECK(pinned.cost.kind == CostKind::Quadratic);
    CHECK(pinned.lambda == free.lambda);
    CHECK(pinned.tau == free.tau);
}

TEST_CASE("lambda against mu after rescaling is reported, not assumed") {
    // lambda_i / mu_i = rho_i <= rho < 1.5, so lambda_i >= mu_i is possible
    int above = 0;
    for (std::uint64_t seed = 0; seed < 2'000; ++seed) {
        const auto inst = generate_instance(seed);
        for (int j = 0; j < inst.machine_count(); ++j) {
            REQUIRE(inst.lambda[j] / inst.mu[j] <= 1.5 * 1.05 / 0.95);
            above += inst.lambda[j] >= inst.mu[j];
        }
    }
    MESSAGE("machines with lambda >= mu in 2000 instances: " << above);
}

TEST_CASE("instance JSON round trips bit-exactly") {
    std::vector<InstanceParameters> all = appendix_d_instances();
    all.push_back(example1_instance());
    for (std::uint64_t seed = 0; seed < 200; ++seed) all.push_back(generate_instance(seed));
    for (const auto& inst : all) {
        const auto back = instance_from_json(instance_to_json(inst));
        CHECK(back == inst);
    }
    const auto path = std::filesystem::temp_directory_path() / "netrepair_instance_roundtrip.json";
    save_instance(all.front(), path);
    CHECK(load_instance(path) == all.front());
    std::filesystem::remove(path);
}

TEST_CASE("malformed instance files report the field path") {
    const std::string good = instance_to_json(example1_instance());
    CHECK_THROWS_AS(instance_from_json("{not json"), SchemaError);
    auto broken = good;
    broken.replace(broken.find("\"lambda\""), 8, "\"lambdX\"");
    try {
        instance_from_json(broken);
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("lambda") != std::string::npos);
    }
    auto version = good;
    const auto pos = version.find("\"schema_version\"");
    REQUIRE(pos != std::string::npos);
    const auto colon = version.find(':', pos);
    const auto end = version.find_first_of(",}", colon);
    version.replace(colon + 1, end - colon - 1, " 99");
    CHECK_THROWS_AS(instance_from_json(version), SchemaError);
    CHECK_THROWS(load_instance("/nonexistent/instance.json"));
}

TEST_CASE("validation names the violated invariant") {
    auto inst = example1_instance();
    inst.mu[1] = 0.0;
    CHECK_THROWS_WITH_AS(inst.validate(), doctest::Contains("mu[1]"), std::invalid_argument);
    inst = example1_instance();
    inst.cap[0] = 0;
    CHECK_THROWS_WITH_AS(inst.validate(), doctest::Contains("K[0]"), std::invalid_argument);
    inst = example1_instance();
    inst.tau = -1.0;
    CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
}

TEST_CASE("decimal text round trips") {
    for (double v : {0.1, 0.12, 1.0 / 3.0, 13.0, 1e-7, 0.024}) {
        CHECK(parse_decimal(exact_decimal(v)) == v);
    }
}
