import math

import pytest

import netrepair as nr


def test_generation_is_deterministic_and_round_trips():
    a = nr.generate_instance(3, machines=3, cap=2)
    b = nr.generate_instance(3, machines=3, cap=2)
    assert a == b
    assert a.machines == 3 and a.cap == [2, 2, 2]
    assert nr.Instance.from_json(a.to_json()) == a


def test_dp_on_example1():
    inst = nr.example1_instance()
    sol = nr.solve_dp(inst)
    assert sol["g_star"] == pytest.approx(1.175463, abs=1e-6)
    assert sol["g_star"] + sol["u_star"] == pytest.approx(inst.failed_cost_total)
    assert sol["residual"] < 1e-8


def test_appendix_d_case_a():
    inst = nr.appendix_d_instances()[0]
    assert nr.evaluate_index(inst)["g"] == pytest.approx(2.37, abs=0.01)
    assert nr.solve_dp(inst)["g_star"] == pytest.approx(2.25, abs=0.01)


def test_policies_simulate():
    inst = nr.appendix_d_instances()[2]
    for name in ["index", "modified-index", "polling", "passive"]:
        report = nr.simulate(inst, name, steps=5000, crn_seed=1)
        assert report["steps"] == 5000
        assert math.isfinite(report["g"])
    with pytest.raises(ValueError):
        nr.simulate(inst, "teleport")


def test_opi_is_reproducible():
    inst = nr.example1_instance()
    a = nr.run_opi(inst, steps=2000, seed=4, r2=20000, r_off=200, tau_max_steps=20000)
    b = nr.run_opi(inst, steps=2000, seed=4, r2=20000, r_off=200, tau_max_steps=20000)
    assert a == b
    assert 0.0 <= a["safe_fraction"] <= 1.0


def test_benchmark_and_fixtures():
    csv = nr.benchmark_csv([1, 2], machines=2, cap=1, steps=2000)
    lines = csv.strip().splitlines()
    assert lines[0].startswith("instance,seed,m,K")
    assert len(lines) == 3
    assert all(passed for _, passed in nr.verify_fixtures())


def test_schema_errors():
    with pytest.raises(ValueError):
        nr.Instance.from_json("{not json")
