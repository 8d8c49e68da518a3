"""LTOL: duality, descriptor semantics, letters and lasso evaluation."""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import (
    all_letters,
    random_descriptor,
    random_formula,
    random_lasso,
    random_message,
    vocab_system,
)
from recipe_mc import ltol as L
from recipe_mc.model import FALSE, TRUE, Message, characteristic, iter_cv_assignments
from recipe_mc.oracles import brute_descriptor_satisfiable, pi_subset_masks
from recipe_mc.parser import parse_descriptor, parse_formula

VOCAB = vocab_system()
CV = tuple(VOCAB.common)
seeds = st.integers(0, 1_000_000)


def all_messages(system=VOCAB):
    """Every message over the vocabulary, one per subset of CV assignments."""
    cv = tuple(system.common)
    assignments = iter_cv_assignments(cv)
    for ch in system.channels:
        for data in system.data_assignments():
            for k in system.agent_names:
                for r in range(len(assignments) + 1):
                    for chosen in itertools.combinations(assignments, r):
                        yield Message(ch, data, k, characteristic(chosen, cv))


MESSAGES = list(all_messages())


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_dual_is_an_involution(seed):
    rng = random.Random(seed)
    f = random_formula(rng)
    o = random_descriptor(rng)
    assert L.dual(L.dual(f)) == f
    assert L.dual(L.dual(o)) == o


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_dual_is_semantic_negation(seed):
    rng = random.Random(seed)
    f = random_formula(rng)
    lasso = random_lasso(rng, CV)
    assert L.eval_formula(L.dual(f), lasso, CV) == (not L.eval_formula(f, lasso, CV))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_descriptor_dual_is_negation_on_every_message(seed):
    o = random_descriptor(random.Random(seed))
    d = L.dual_descriptor(o)
    for m in MESSAGES[::7]:
        assert L.message_models(m, d, CV) == (not L.message_models(m, o, CV))


def test_modality_dual_keeps_the_descriptor():
    o = L.ChanAtom("c")
    p = L.Prop("a.p", "true")
    assert L.dual(L.Diamond(o, p)) == L.Box(o, L.dual(p))
    # not <O> p  ==  if the message matches O then not p next
    lasso = L.Lasso((), (({"a.p": "false"}, Message("c", (("m", "0"),), "a", TRUE)),))
    assert not L.eval_formula(L.Diamond(o, p), lasso, CV)
    assert L.eval_formula(L.Box(o, L.dual(p)), lasso, CV)


# ---------------------------------------------------------------------------
# Descriptor semantics


def _msg(pi, ch="*"):
    return Message(ch, (("m", "0"),), "a", pi)


def test_empty_predicate_makes_universal_true_and_existential_false():
    m = _msg(FALSE)
    assert L.message_models(m, parse_descriptor("all(@f & !@f)", VOCAB), CV)
    assert not L.message_models(m, parse_descriptor("some(true)", VOCAB), CV)


def test_bare_literals_take_their_implicit_quantifier():
    for text, quantified in [("@f", "all(@f)"), ("!@f", "some(!@f)"), ("@g = false", "all(@g = false)")]:
        a, b = parse_descriptor(text, VOCAB), parse_descriptor(quantified, VOCAB)
        assert [L.message_models(m, a, CV) for m in MESSAGES] == \
            [L.message_models(m, b, CV) for m in MESSAGES]


def test_outer_quantifier_cancels_inner_ones():
    nested = parse_descriptor("some(@f | all(some(@g)))", VOCAB)
    flat = parse_descriptor("some(@f | @g)", VOCAB)
    assert [L.message_models(m, nested, CV) for m in MESSAGES] == \
        [L.message_models(m, flat, CV) for m in MESSAGES]


def test_letters_partition_the_message_space():
    observations = [parse_descriptor(t, VOCAB) for t in
                    ("ch = c", "some(@f)", "all(@f | @g)", "a & d(m) = 1")]
    letters = list(all_letters(observations))
    table = L.ObservationTable(observations, CV)
    for m in MESSAGES:
        hits = [x for x in letters if L.letter_models(m, x, observations, CV)]
        assert len(hits) == 1
        assert frozenset(observations[i] for i in table.letter(m)) == hits[0]


# ---------------------------------------------------------------------------
# Letter satisfiability


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_descriptor_satisfiable_agrees_with_brute_force(seed):
    o = random_descriptor(random.Random(seed), depth=3)
    found = L.descriptor_satisfiable(o, VOCAB)
    brute = brute_descriptor_satisfiable(o, VOCAB)
    assert (found is None) == (brute is None)
    if found is not None:
        assert L.message_models(found, o, CV)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_existential_bound_loses_nothing(seed):
    # against every sender predicate, not just the small ones
    o = random_descriptor(random.Random(seed), depth=3)
    n = len(iter_cv_assignments(CV))
    every = pi_subset_masks(n, n)
    assert len(every) == 2 ** n
    bounded = brute_descriptor_satisfiable(o, VOCAB)
    full = brute_descriptor_satisfiable(o, VOCAB, pi_masks=every)
    assert (bounded is None) == (full is None)


def test_hidden_broadcast_is_satisfiable_only_by_the_empty_predicate():
    o = parse_descriptor("all(false) & ch = *", VOCAB)
    m = L.descriptor_satisfiable(o, VOCAB)
    assert m is not None and m.ch == "*" and m.pi == FALSE


def test_contradictory_letter_is_unsatisfiable():
    obs = [parse_descriptor("some(@f)", VOCAB), parse_descriptor("all(!@f)", VOCAB)]
    ok, _ = L.letter_satisfiable(frozenset(obs), obs, VOCAB)
    assert not ok
    ok, witness = L.letter_satisfiable(frozenset(obs[:1]), obs, VOCAB)
    assert ok and L.letter_models(witness, obs[:1], obs, CV)


# ---------------------------------------------------------------------------
# Lasso evaluation


def _pos(p, ch="*"):
    return ({"a.p": p, "a.q": "false"}, Message(ch, (("m", "0"),), "a", TRUE))


def test_temporal_operators_on_a_lasso():
    lasso = L.Lasso((_pos("false"), _pos("false")), (_pos("true", "c"), _pos("false")))
    f = lambda t: parse_formula(t, VOCAB)
    assert not L.eval_formula(f("a.p"), lasso, CV)
    assert L.eval_formula(f("F a.p"), lasso, CV)
    assert not L.eval_formula(f("G F !a.p -> G a.p"), lasso, CV)
    assert L.eval_formula(f("G F a.p"), lasso, CV)
    assert L.eval_formula(f("!a.p U a.p"), lasso, CV)
    assert L.eval_formula(f("X X a.p"), lasso, CV)
    assert L.eval_formula(f("G([ch = c] !a.p)"), lasso, CV)
    assert not L.eval_formula(f("F <ch = c> a.p"), lasso, CV)
    assert L.eval_formula(f("!a.p W a.p"), lasso, CV)


def test_lasso_needs_a_loop():
    with pytest.raises(ValueError):
        L.Lasso((_pos("true"),), ())


def test_shared_subformulas_are_evaluated_once_in_order():
    p = L.Prop("a.p", "true")
    f = L.FAnd(L.Until(p, p), L.FOr(p, L.Until(p, p)))
    order = L.bottom_up(f)
    assert order.index(p) < order.index(L.Until(p, p)) < order.index(f)
    lasso = L.Lasso((), (_pos("true"),))
    assert L.eval_formula(f, lasso, CV)


def test_observations_are_collected_once():
    f = parse_formula("G(<ch = c> a.p | [ch = c] a.q | <a> true)", VOCAB)
    assert L.top_observations(f) == (L.ChanAtom("c"), L.SenderAtom("a"))
