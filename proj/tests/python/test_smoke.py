import os
from pathlib import Path

import pytest

import jobshoplab as jsl

DATA = Path(os.environ.get("JSL_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture
def d2():
    return jsl.load_instance_file(str(DATA / "instances" / "d2.dsl"))


def test_instance_loading(d2):
    assert d2.num_jobs == 2
    assert d2.num_operations == 4
    assert d2.classification == "J || Cmax"
    assert jsl.load_instance(d2.to_dsl()).to_dsl() == d2.to_dsl()
    with pytest.raises(jsl.ParseError):
        jsl.load_instance("machine m1\njob J1\n  op m9 5\n")


def test_binary_episode_one_operation():
    inst = jsl.load_instance("machine m1\njob J1\n  op m1 5\n")
    env = jsl.Environment(inst, "action binary\nreward makespan terminal\n")
    assert env.action_space() == [2]
    state, obs = env.reset(0)
    assert len(obs) == 7
    state, obs, reward, done, info = env.step(state, True)
    assert done
    assert reward == -1.0
    assert info["objectives"]["makespan"] == 5


def test_invalid_multidiscrete_action_keeps_state(d2):
    env = jsl.Environment(d2, "action multidiscrete")
    state, _ = env.reset(0)
    after, _, reward, done, info = env.step(state, [2, 0])
    assert info["invalid_action"]
    assert after == state
    assert reward == 0.0 and not done


def test_dispatch_episode_and_validation(d2):
    for policy in ("spt", "mwkr"):
        result = jsl.run_episode(d2, policy=policy)
        assert result["objectives"]["makespan"] == 7
        assert jsl.validate_trace(d2, __import__("json").dumps(result["trace"])) == []
    gantt = jsl.gantt(result["trace"])
    assert gantt["makespan"] == 7
    assert {r["id"] for r in gantt["resources"]} == {"m1", "m2"}


def test_exact_solver(d2):
    assert jsl.solve_exact(d2)["makespan"] == 7
    ft06 = jsl.load_instance_file(str(DATA / "orlib" / "ft06.txt"))
    with pytest.raises(jsl.SizeGuardError):
        jsl.solve_exact(ft06)
    assert jsl.solve_exact(ft06, force=True)["makespan"] == 55


def test_benchmark_report(d2):
    report = jsl.benchmark([d2], ["spt", "mwkr"], seeds=[0, 1, 2], workers=2)
    again = jsl.benchmark([d2], ["spt", "mwkr"], seeds=[0, 1, 2], workers=1)
    assert report == again
    for summary in report["summaries"]:
        assert summary["ratio"] == 1.0


def test_config_errors(d2):
    with pytest.raises(jsl.ConfigError):
        jsl.Environment(d2, "action warp9")
