import math

import aomdp_lab


def small_plan():
    return {
        "scenario": {"positive_level": "small", "negative_level": "minimal", "n_users": 2, "horizon": 8, "seed": 3},
        "agents": ["active", "always", "never", "zero"],
        "reps": 2,
    }


def test_run_plan_summary():
    res = aomdp_lab.run_plan(small_plan())
    assert res["errors"] == []
    assert res["n_records"] == 4 * 2 * 2 * 8
    rows = res["summary"]
    assert {r["agent"] for r in rows} == {"active", "always", "never", "zero"}
    for r in rows:
        if r["agent"] == "zero":
            assert r["adjusted_reward"]["mean"] == 0.0
        if r["agent"] == "always":
            assert r["measure_rate"]["mean"] == 1.0


def test_run_plan_is_deterministic():
    assert aomdp_lab.run_plan(small_plan()) == aomdp_lab.run_plan(small_plan())


def test_generate_users():
    users = aomdp_lab.generate_users(small_plan()["scenario"])
    assert len(users) == 2


def test_kalman_first_step():
    mean, var = aomdp_lab.kalman_filter(1.0, 1.0, 1.0, 1.0, [2.0])
    # prior N(0,1) predicts N(0,2); gain 2/3
    assert math.isclose(mean[0], 4.0 / 3.0)
    assert math.isclose(var[0], 2.0 / 3.0)


def test_splitmix():
    assert aomdp_lab.splitmix64(0) == 0xE220A8397B1DCDAF
