"""Verdicts on the bundled production-line corpus beyond the acceptance table."""

from functools import lru_cache

import pytest

from helpers import load_rms, rms_path
from recipe_mc import automata as A
from recipe_mc.parser import load_formula
from recipe_mc.symbolic import SymbolicSystem

ROBOTS = ("r1", "r2", "r3", "s1")


@lru_cache(maxsize=None)
def _system(name):
    system = load_rms(name)
    return system, SymbolicSystem(system)


@lru_cache(maxsize=None)
def verdict(system_name, formula_name):
    system, sym = _system(system_name)
    f = load_formula(rms_path(f"{formula_name}.ltol"), system)
    return A.model_check(system, f, sym=sym), system, f


@pytest.mark.parametrize("robot", ROBOTS)
def test_guarded_disconnect_holds_for_every_robot(robot):
    # with the join of robot k excluded from the premise, phi2 holds
    v, _, _ = verdict("rms", f"guarded_disconnect_{robot}")
    assert v.result == "holds"


@pytest.mark.parametrize("robot", ("r1", "r2", "r3"))
def test_disconnect_fails_when_a_teammate_joins_last(robot):
    v, system, f = verdict("rms", f"disconnect_{robot}")
    assert v.result == "fails"
    assert A.replay_counterexample(system, f, v)
    # the counterexample contains a join by another type 1 robot while
    # the robot under test is already on channel A
    joins = [m for _, m in v.stem + v.loop
             if dict(m.data)["msg"] == "form" and m.sender not in (robot, "line")]
    assert joins


PAIR = ["team_targets"] + [f"{k}_{r}" for r in ("r1", "s1")
                           for k in ("connect", "disconnect", "guarded_disconnect")]


@pytest.mark.parametrize("name", PAIR)
def test_one_robot_per_type_satisfies_everything_but_two_forms(name):
    assert verdict("rms_pair", name)[0].result == "holds"


def test_one_robot_per_type_cannot_send_two_forms():
    v, system, f = verdict("rms_pair", "two_forms")
    assert v.result == "fails"
    assert A.replay_counterexample(system, f, v)


@pytest.mark.parametrize("name, expected", [
    ("team_targets", "holds"),
    ("two_forms", "holds"),
    ("connect_r1", "holds"),
    ("connect_r2", "holds"),
    ("disconnect_r1", "fails"),
    ("disconnect_r2", "fails"),
    ("guarded_disconnect_r1", "holds"),
    ("guarded_disconnect_r2", "holds"),
])
def test_two_robot_line(name, expected):
    assert verdict("rms_small", name)[0].result == expected


def test_deaf_join_mutant_deadlocks():
    v, _, _ = verdict("mutant_deaf_join", "two_forms")
    assert v.deadlock is not None


def test_rms_state_space_size():
    v, _, _ = verdict("rms", "team_targets")
    assert v.stats["states"] == 193
    assert v.stats["transitions"] == 1920
    assert v.deadlock is None
