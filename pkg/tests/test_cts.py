"""Channelled transition systems and their parallel composition."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import load_rms, payload_universe, random_explicit_cts, random_system
from laws import (
    broadcast_violations,
    isomorphism_violations,
    multicast_violations,
    reassociate,
    swap,
)
from recipe_mc.cts import (
    AgentCts,
    ComposedCts,
    ExplicitCts,
    StateLimitExceeded,
    compose,
    compose_all,
    cts_reachable,
    flatten,
    nest,
    system_cts,
    to_dot,
)
from recipe_mc.model import TRUE

PAYLOADS = payload_universe()
P0 = ((("m", "0"),), "a", TRUE)


def sender():
    """Agent a: sends m=0 on c from 0, on * from 1."""
    return ExplicitCts(("*", "c"), ["a0", "a1"], ["a0"],
                       [("a0", (P0, "!", "c"), "a1"), ("a1", (P0, "!", "*"), "a0")], {})


def receiver(listen_c, recv_c, recv_star):
    trans = []
    if recv_c:
        trans.append(("b0", (P0, "?", "c"), "b1"))
    if recv_star:
        trans.append(("b0", (P0, "?", "*"), "b1"))
    return ExplicitCts(("*", "c"), ["b0", "b1"], ["b0"], trans, {"b0": ["c"] if listen_c else []})


def sends_from(comp, s, ch):
    return sorted(t for lbl, t in comp.sends(s) if lbl.ch == ch)


def test_send_receive_synchronises():
    comp = compose(sender(), receiver(True, True, False))
    assert sends_from(comp, ("a0", "b0"), "c") == [("a1", "b1")]


def test_send_discard_when_partner_does_not_listen():
    comp = compose(sender(), receiver(False, False, False))
    assert sends_from(comp, ("a0", "b0"), "c") == [("a1", "b0")]


def test_multicast_blocks_on_a_listening_partner_that_cannot_receive():
    comp = compose(sender(), receiver(True, False, False))
    assert sends_from(comp, ("a0", "b0"), "c") == []


def test_broadcast_never_blocks():
    comp = compose(sender(), receiver(False, False, False))
    assert sends_from(comp, ("a1", "b0"), "*") == [("a0", "b0")]


def test_broadcast_receive_is_not_optional():
    comp = compose(sender(), receiver(False, False, True))
    assert sends_from(comp, ("a1", "b0"), "*") == [("a0", "b1")]


def test_receive_receive_and_receive_discard():
    b = receiver(True, True, True)
    c = ExplicitCts(("*", "c"), ["c0", "c1"], ["c0"], [("c0", (P0, "?", "*"), "c1")], {})
    bc = compose(b, c)
    # both receive on *; only b listens on c
    assert bc.receives(("b0", "c0"), P0, "*") == [("b1", "c1")]
    assert bc.receives(("b0", "c0"), P0, "c") == [("b1", "c0")]
    assert bc.listening(("b0", "c0")) == {"*", "c"}


def test_star_receive_with_one_deaf_component():
    b = receiver(False, False, True)
    c = ExplicitCts(("*", "c"), ["c0"], ["c0"], [], {})
    assert compose(b, c).receives(("b0", "c0"), P0, "*") == [("b1", "c0")]


@pytest.mark.parametrize("rule, state, ch, expected", [
    ("send-recv", ("a0", "b0"), "c", []),
    ("star", ("a1", "b0"), "*", []),
])
def test_dropping_a_rule_removes_its_transitions(rule, state, ch, expected):
    rules = tuple(r for r in ComposedCts.RULES if r != rule)
    b = receiver(True, True, False) if rule == "send-recv" else receiver(False, False, False)
    assert sends_from(compose(sender(), b, rules), state, ch) == expected


# ---------------------------------------------------------------------------
# Laws on random explicit systems


def _triple(seed):
    rng = random.Random(seed)
    return [random_explicit_cts(rng, n) for n in "abc"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_composition_commutes(seed):
    a, b, _ = _triple(seed)
    assert isomorphism_violations(compose(a, b), compose(b, a), swap, PAYLOADS) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_composition_associates(seed):
    a, b, c = _triple(seed)
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    assert isomorphism_violations(left, right, reassociate, PAYLOADS) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_broadcast_and_multicast_discipline(seed):
    a, b, c = _triple(seed)
    comp = compose(compose(a, b), c)
    assert broadcast_violations(comp, PAYLOADS) == []
    assert multicast_violations(comp, PAYLOADS) == []


@pytest.mark.parametrize("rule", ComposedCts.RULES)
def test_every_rule_is_needed_for_some_law(rule):
    rules = tuple(r for r in ComposedCts.RULES if r != rule)
    for seed in range(30):
        a, b, c = _triple(seed)
        comp = compose(compose(a, b, rules), c, rules)
        other = compose(a, compose(b, c, rules), rules)
        if (broadcast_violations(comp, PAYLOADS) or multicast_violations(comp, PAYLOADS)
                or isomorphism_violations(comp, other, reassociate, PAYLOADS)):
            return
    pytest.fail(f"no law notices the missing {rule} rule")


# ---------------------------------------------------------------------------
# Agent transition systems


def test_agent_cts_laws_on_generated_systems():
    for seed in range(10):
        system = random_system(seed, 3)
        a, b, c = [AgentCts(x, system) for x in system.agents]
        payloads = sorted({lbl.payload for p in (a, b, c) for s in p.agent.states()
                           for lbl, _ in p.sends(s)}, key=repr)
        comp = compose(compose(a, b), c)
        assert isomorphism_violations(comp, compose(a, compose(b, c)), reassociate, payloads) == []
        assert broadcast_violations(comp, payloads) == []
        assert multicast_violations(comp, payloads) == []


def test_agent_never_receives_its_own_message():
    system = load_rms("rms_small")
    r1 = AgentCts(system.agent("r1"), system)
    line = AgentCts(system.agent("line"), system)
    s_line = line.initial_states()[0]
    lbl, _ = line.sends(s_line)[0]
    for s in r1.initial_states():
        assert line.receives(s_line, lbl.payload, lbl.ch) == []
        assert r1.listening(s) >= {"*"}


def test_flatten_and_nest_are_inverse():
    s = ("x", "y", "z", "w")
    assert nest(s) == ((("x", "y"), "z"), "w")
    assert flatten(nest(s), 4) == s
    assert flatten("x", 1) == ("x",)


def test_reachable_rms_small():
    cts = system_cts(load_rms("rms_small"))
    states, n_trans = cts_reachable(cts)
    assert len(states) == 36
    assert n_trans > 0
    with pytest.raises(StateLimitExceeded):
        cts_reachable(cts, max_states=5)


def test_dot_export():
    dot = to_dot(compose_all([sender(), receiver(True, True, True)]), name="ab")
    assert dot.startswith("digraph ab {")
    assert "->" in dot and dot.rstrip().endswith("}")
