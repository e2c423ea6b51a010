#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "netrepair/dp.hpp"
#include "netrepair/index_policy.hpp"
#include "netrepair/opi.hpp"

using namespace netrepair;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Evaluates r1 h1 - r2 h2 + (r2 - r1) hx at every vertex of the box and
/// returns the largest value.
double vertex_max(double r1, const Interval& y1, double r2, const Interval& y2, const Interval& x) {
    double best = -kInf;
    for (double h1 : {y1.lo, y1.hi})
        for (double h2 : {y2.lo, y2.hi})
            for (double hx : {x.lo, x.hi}) best = std::max(best, r1 * h1 - r2 * h2 + (r2 - r1) * hx);
    return best;
}

Interval random_interval(Rng& rng) {
    const double centre = rng.uniform(-5.0, 5.0);
    const double half = rng.uniform(0.0, 2.0);
    return {centre - half, centre + half};
}

}  // namespace

TEST_CASE("learning rate") {
    CHECK(learning_rate(1) == 1.0);
    CHECK(learning_rate(2) == doctest::Approx(10.0 / 11.0));
    CHECK(learning_rate(10) == doctest::Approx(10.0 / 19.0));
}

TEST_CASE("recursive statistics equal explicitly weighted sums") {
    Rng rng(3, Stream::Oracle);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.integer(1, 200);
        std::vector<double> obs;
        ValueStoreEntry e;
        for (int k = 0; k < n; ++k) {
            obs.push_back(rng.uniform(-10.0, 10.0));
            observe(e, obs.back());
        }
        // weight of observation k is a_k times the product of (1 - a_l) for l > k
        std::vector<double> w(n);
        for (int k = 0; k < n; ++k) {
            w[k] = learning_rate(k + 1);
            for (int l = k + 1; l < n; ++l) w[k] *= 1.0 - learning_rate(l + 1);
        }
        double sum_w = 0, h = 0, ss = 0, w2 = 0;
        for (int k = 0; k < n; ++k) {
            sum_w += w[k];
            h += w[k] * obs[k];
            ss += w[k] * obs[k] * obs[k];
            w2 += w[k] * w[k];
        }
        CHECK(e.s == static_cast<std::uint64_t>(n));
        CHECK(sum_w == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.h == doctest::Approx(h).epsilon(1e-10));
        CHECK(e.ss == doctest::Approx(ss).epsilon(1e-10));
        CHECK(e.w == doctest::Approx(w2).epsilon(1e-10));
        if (n >= 2) {
            const auto ci = confidence_interval(e);
            const double half = 1.96 * std::sqrt((ss - h * h) / (1.0 - w2) * w2);
            CHECK(ci.lo == doctest::Approx(h - half).epsilon(1e-8));
            CHECK(ci.hi == doctest::Approx(h + half).epsilon(1e-8));
        }
    }
}

TEST_CASE("confidence interval edge cases") {
    ValueStoreEntry one;
    observe(one, 4.0);
    CHECK_FALSE(confidence_interval(one).bounded());

    ValueStoreEntry two;
    observe(two, 1.0);
    observe(two, 3.0);
    // a_2 = 10/11: h = 1/11 + 30/11, W = (1/11)^2 + (10/11)^2
    CHECK(two.h == doctest::Approx(31.0 / 11.0));
    CHECK(two.w == doctest::Approx(101.0 / 121.0));
    const auto ci = confidence_interval(two);
    REQUIRE(ci.bounded());
    const double var = two.ss - two.h * two.h;
    CHECK(ci.hi - ci.lo == doctest::Approx(2 * 1.96 * std::sqrt(var / (1 - 101.0 / 121.0) * 101.0 / 121.0)));

    ValueStoreEntry flat;
    for (int k = 0; k < 30; ++k) observe(flat, 0.3);
    const auto zero = confidence_interval(flat);
    REQUIRE(zero.bounded());
    CHECK(zero.lo == doctest::Approx(0.3));
    CHECK(zero.hi == doctest::Approx(0.3));

    CHECK_FALSE(confidence_interval(ValueStoreEntry{0.0, 0.0, 1.0, 5}).bounded());
    CHECK_FALSE(confidence_interval(ValueStoreEntry{2.0, 1.0, 0.2, 5}).bounded());
}

TEST_CASE("certainly better agrees with an interval vertex oracle") {
    Rng rng(12, Stream::Oracle);
    for (int trial = 0; trial < 20'000; ++trial) {
        const double r1 = rng.integer(0, 3) == 0 ? 0.0 : rng.uniform(0.0, 1.0);
        const double r2 = rng.integer(0, 3) == 0 ? 0.0 : rng.uniform(0.0, 1.0);
        const auto y1 = random_interval(rng), y2 = random_interval(rng), x = random_interval(rng);
        CHECK(certainly_better(r1, y1, r2, y2, x) == (vertex_max(r1, y1, r2, y2, x) < 0.0));
    }
    const Interval wide{-kInf, kInf};
    CHECK_FALSE(certainly_better(0.5, wide, 0.2, {0, 0}, {0, 0}));
    CHECK(certainly_better(0.0, wide, 0.2, {1, 2}, {-1, -0.5}));
    CHECK_FALSE(certainly_better(0.2, {0, 0}, 0.2, {0, 0}, {0, 0}));
}

TEST_CASE("neighbourhood order") {
    const auto inst = appendix_d_instances()[0];
    const auto f = neighbourhood(inst, {0, {2, 0, 1}});
    REQUIRE(f.size() == 3);
    CHECK(f[0] == SystemState{0, {2, 0, 1}});
    CHECK(f[1] == SystemState{star_center(inst.layout), {2, 0, 1}});
    CHECK(f[2] == SystemState{0, {1, 0, 1}});
    CHECK(neighbourhood(inst, {star_center(inst.layout), {1, 1, 1}}).size() == 4);
}

TEST_CASE("trajectories stop at stored states") {
    const auto inst = example1_instance();
    IndexPolicy base(inst, true);
    const double g = 1.5;
    SUBCASE("a trajectory from the reference may return to it") {
        ValueStore store(inst, initial_state(inst), g);
        Rng rng(2);
        const auto t = sample_trajectory(inst, base, store, initial_state(inst), 1, rng);
        CHECK(t.stopping_state == initial_state(inst));
        const auto* e = store.find(initial_state(inst));
        CHECK(e->s == 2);
        // the first new observation gets weight 10/11
        const double sample = t.total_cost - g * static_cast<double>(t.total_steps);
        CHECK(e->h == doctest::Approx(10.0 / 11.0 * sample));
    }
    SUBCASE("a trajectory never stops at its own start") {
        ValueStore store(inst, initial_state(inst), g);
        const SystemState z{1, {1, 1}};
        store.entry(store.codec().encode(z)) = ValueStoreEntry{7.0, 49.0, 0.5, 3};
        Rng rng(9);
        const auto t = sample_trajectory(inst, base, store, z, 4, rng);
        CHECK(t.stopping_state == initial_state(inst));
        CHECK(t.visited_prefix.front().state == z);
        CHECK(t.visited_prefix.size() <= 4);
        for (std::size_t a = 0; a < t.visited_prefix.size(); ++a)
            for (std::size_t b = a + 1; b < t.visited_prefix.size(); ++b)
                CHECK_FALSE(t.visited_prefix[a].state == t.visited_prefix[b].state);
        const auto* e = store.find(z);
        CHECK(e->s == 4);
        for (std::size_t k = 1; k < t.visited_prefix.size(); ++k) {
            const auto* f = store.find(t.visited_prefix[k].state);
            REQUIRE(f != nullptr);
            CHECK(f->s == 1);
            const double sample = (t.total_cost - t.visited_prefix[k].cost) -
                                  g * static_cast<double>(t.total_steps - t.visited_prefix[k].steps);
            CHECK(f->h == doctest::Approx(sample));
        }
    }
    SUBCASE("overlong trajectories are reported") {
        ValueStore store(inst, initial_state(inst), g);
        Rng rng(1);
        CHECK_THROWS_AS(sample_trajectory(inst, base, store, {0, {2, 2}}, 1, rng, 1), std::runtime_error);
    }
}

TEST_CASE("improving action follows certain comparisons") {
    const auto inst = example1_instance();
    IndexPolicy rule(inst, true);
    const auto policy = tabulate(inst, rule);
    const auto ev = evaluate_policy(inst, policy, initial_state(inst));
    const UniformizedChain chain(inst);
    const StateCodec codec(inst);

    // tight intervals around the base policy's relative values
    ValueStore store(inst, initial_state(inst), ev.g);
    for (std::uint64_t k = 0; k < codec.size(); ++k) {
        const double h = ev.v[k];
        store.entry(k) = ValueStoreEntry{h, h * h + 1e-12, 0.01, 100};
    }
    int decided = 0;
    for (const auto& x : enumerate_states(inst)) {
        IndexPolicy base(inst, true);
        const auto choice = improving_action(inst, x, store, base);
        double best = kInf, second = kInf;
        Action arg = x.location;
        for (Action a : admissible_actions(inst, x)) {
            double delta = 0.0;
            if (a == x.location && x.conditions[a] >= 1) {
                SystemState y = x;
                --y.conditions[a];
                delta = chain.repair_probability(a) * (ev.v[codec.encode(y)] - ev.v[codec.encode(x)]);
            } else if (a != x.location) {
                SystemState y = x;
                y.location = a;
                delta = chain.switch_probability() * (ev.v[codec.encode(y)] - ev.v[codec.encode(x)]);
            }
            if (delta < best) {
                second = best;
                best = delta;
                arg = a;
            } else {
                second = std::min(second, delta);
            }
        }
        if (!choice.safe) {
            ++decided;
            CHECK(choice.action == arg);
        } else {
            CHECK(choice.action == rule.decide(x));
            CHECK(second - best < 1e-4);
        }
    }
    CHECK(decided > 0);
}

TEST_CASE("improving action is invariant to shifting every value") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        GenerateOverrides pins;
        pins.machines = 3;
        pins.cap = 1;
        const auto inst = generate_instance(seed, pins);
        const StateCodec codec(inst);
        Rng rng(seed, Stream::Oracle);
        ValueStore a(inst, initial_state(inst), 1.0), b(inst, initial_state(inst), 1.0);
        const double shift = 6.0;
        for (std::uint64_t k = 0; k < codec.size(); ++k) {
            if (rng.integer(0, 9) == 0) continue;
            const double h = rng.uniform(-3.0, 3.0), var = rng.uniform(0.0, 0.01);
            a.entry(k) = ValueStoreEntry{h, h * h + var, 0.05, 50};
            b.entry(k) = ValueStoreEntry{h + shift, (h + shift) * (h + shift) + var, 0.05, 50};
        }
        for (const auto& x : enumerate_states(inst)) {
            IndexPolicy base(inst, true);
            const auto ca = improving_action(inst, x, a, base);
            const auto cb = improving_action(inst, x, b, base);
            CHECK(ca.action == cb.action);
            CHECK(ca.safe == cb.safe);
        }
    }
}

TEST_CASE("budgets") {
    OpiBudget b;
    CHECK_NOTHROW(b.validate());
    b.r_on = 0;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b = OpiBudget::desk_scale();
    b.r1 = 0;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    const auto paper = OpiBudget::paper_scale();
    CHECK(paper.mode == BudgetMode::WallClock);
    CHECK(paper.r2 == 500'000);
    CHECK(paper.r_off == 100'000);
    CHECK(paper.r_on == 500'000);
    CHECK(paper.delta_seconds == 0.01);
}

TEST_CASE("step-count runs are bit-reproducible and the store round trips") {
    const auto inst = appendix_d_instances()[0];
    OpiBudget budget;
    budget.r2 = 20'000;
    budget.r_off = 300;
    budget.tau_max_steps = 20'000;
    budget.r_on = 4'000;
    const auto crn = make_crn(99, budget.r_on);
    const auto a = run_opi(inst, budget, 99, initial_state(inst), crn);
    const auto b = run_opi(inst, budget, 99, initial_state(inst), crn);
    CHECK(a.online.report.total_cost == b.online.report.total_cost);
    CHECK(a.online.report.safe_actions == b.online.report.safe_actions);
    CHECK(a.store == b.store);
    CHECK(a.preparatory.core.front() == a.preparatory.reference);
    CHECK(a.online.report.steps == budget.r_on);

    double mean = 0.0;
    for (double q : a.online.safe_quartile_fraction) {
        CHECK(q >= 0.0);
        CHECK(q <= 1.0);
        mean += q / 4.0;
    }
    CHECK(mean == doctest::Approx(a.online.report.safe_fraction()));

    const auto back = ValueStore::from_json(inst, a.store.to_json());
    CHECK(back == a.store);

    CHECK_THROWS_AS(run_opi(inst, budget, 99, initial_state(inst), make_crn(1, 10)), std::invalid_argument);
}
