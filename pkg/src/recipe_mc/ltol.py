"""LTOL formulas, observation descriptors and their semantics.

Formulas are kept in positive normal form: negation only on atoms.  A
descriptor is evaluated against a :class:`~recipe_mc.model.Message`; its
sender predicate ``pi`` is read as the set of common-variable assignments
that satisfy it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .model import (
    Message,
    SystemDef,
    characteristic,
    cv_model_tuples,
    iter_cv_assignments,
)


# ---------------------------------------------------------------------------
# Descriptors


class Descriptor:
    __slots__ = ()

    def __str__(self):
        return format_descriptor(self)


@dataclass(frozen=True)
class DConst(Descriptor):
    value: bool


@dataclass(frozen=True)
class ChanAtom(Descriptor):
    ch: str
    positive: bool = True


@dataclass(frozen=True)
class DataAtom(Descriptor):
    name: str
    value: str
    positive: bool = True


@dataclass(frozen=True)
class SenderAtom(Descriptor):
    agent: str
    positive: bool = True


@dataclass(frozen=True)
class CvAtom(Descriptor):
    name: str
    value: str
    positive: bool = True


@dataclass(frozen=True)
class DAnd(Descriptor):
    left: Descriptor
    right: Descriptor


@dataclass(frozen=True)
class DOr(Descriptor):
    left: Descriptor
    right: Descriptor


@dataclass(frozen=True)
class Exists(Descriptor):
    body: Descriptor


@dataclass(frozen=True)
class Forall(Descriptor):
    body: Descriptor


D_TRUE = DConst(True)
D_FALSE = DConst(False)

_ATOMS = (ChanAtom, DataAtom, SenderAtom, CvAtom)


def dual_descriptor(o: Descriptor) -> Descriptor:
    if isinstance(o, DConst):
        return DConst(not o.value)
    if isinstance(o, _ATOMS):
        return type(o)(*_fields(o)[:-1], not o.positive)
    if isinstance(o, DAnd):
        return DOr(dual_descriptor(o.left), dual_descriptor(o.right))
    if isinstance(o, DOr):
        return DAnd(dual_descriptor(o.left), dual_descriptor(o.right))
    if isinstance(o, Exists):
        return Forall(dual_descriptor(o.body))
    if isinstance(o, Forall):
        return Exists(dual_descriptor(o.body))
    raise TypeError(o)


def _fields(o):
    return tuple(getattr(o, f) for f in o.__dataclass_fields__)


def normalize_descriptor(o: Descriptor, quantified=False) -> Descriptor:
    """Put bare common-variable atoms under their implicit quantifier."""
    if isinstance(o, CvAtom) and not quantified:
        return Forall(o) if o.positive else Exists(o)
    if isinstance(o, DAnd):
        return DAnd(normalize_descriptor(o.left, quantified), normalize_descriptor(o.right, quantified))
    if isinstance(o, DOr):
        return DOr(normalize_descriptor(o.left, quantified), normalize_descriptor(o.right, quantified))
    if isinstance(o, (Exists, Forall)):
        return type(o)(normalize_descriptor(o.body, True))
    return o


def descriptor_atoms(o: Descriptor):
    if isinstance(o, (DAnd, DOr)):
        yield from descriptor_atoms(o.left)
        yield from descriptor_atoms(o.right)
    elif isinstance(o, (Exists, Forall)):
        yield from descriptor_atoms(o.body)
    else:
        yield o


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class FConst(Formula):
    value: bool


@dataclass(frozen=True)
class Prop(Formula):
    """``var = value`` (or ``var != value``) where var is ``agent.name``."""

    var: str
    value: str
    positive: bool = True


@dataclass(frozen=True)
class FAnd(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class FOr(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    """``<O> body``: the current message satisfies O and body holds next."""

    obs: Descriptor
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    """``[O] body``: if the current message satisfies O, body holds next."""

    obs: Descriptor
    body: Formula


TRUE_F = FConst(True)
FALSE_F = FConst(False)


def dual(x):
    """Dual of a formula or descriptor; an involution."""
    if isinstance(x, Descriptor):
        return dual_descriptor(x)
    if isinstance(x, FConst):
        return FConst(not x.value)
    if isinstance(x, Prop):
        return Prop(x.var, x.value, not x.positive)
    if isinstance(x, FAnd):
        return FOr(dual(x.left), dual(x.right))
    if isinstance(x, FOr):
        return FAnd(dual(x.left), dual(x.right))
    if isinstance(x, Until):
        return Release(dual(x.left), dual(x.right))
    if isinstance(x, Release):
        return Until(dual(x.left), dual(x.right))
    if isinstance(x, Diamond):
        # the descriptor is kept: not <O> f means "if O then not f"
        return Box(x.obs, dual(x.body))
    if isinstance(x, Box):
        return Diamond(x.obs, dual(x.body))
    raise TypeError(x)


def eventually(f: Formula) -> Formula:
    return Until(TRUE_F, f)


def always(f: Formula) -> Formula:
    return Release(FALSE_F, f)


def weak_until(f: Formula, g: Formula) -> Formula:
    return Release(g, FOr(g, f))


def implies(f: Formula, g: Formula) -> Formula:
    return FOr(dual(f), g)


def children(f: Formula) -> tuple:
    if isinstance(f, (FAnd, FOr, Until, Release)):
        return (f.left, f.right)
    if isinstance(f, (Diamond, Box)):
        return (f.body,)
    return ()


def subformulas(f: Formula) -> list:
    """Distinct subformulas, pre-order, first occurrence wins."""
    seen = {}
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen[g] = None
        stack.extend(reversed(children(g)))
    return list(seen)


def bottom_up(f: Formula) -> list:
    """Distinct subformulas, every one after all of its children."""
    height: dict = {}
    for g in reversed(subformulas(f)):
        height[g] = 0
    changed = True
    while changed:
        changed = False
        for g in height:
            h = 1 + max((height[c] for c in children(g)), default=-1)
            if h != height[g]:
                height[g] = h
                changed = True
    return sorted(height, key=height.__getitem__)


def top_observations(f: Formula) -> tuple:
    """obs(f): descriptors under a modality, deduplicated, in pre-order."""
    out = {}
    for g in subformulas(f):
        if isinstance(g, (Diamond, Box)):
            out.setdefault(g.obs, None)
    return tuple(out)


def formula_props(f: Formula) -> set:
    return {g.var for g in subformulas(f) if isinstance(g, Prop)}


# ---------------------------------------------------------------------------
# Printing


def _dprec(o):
    if isinstance(o, DOr):
        return 1
    if isinstance(o, DAnd):
        return 2
    return 3


def format_descriptor(o: Descriptor) -> str:
    def wrap(child, level):
        s = format_descriptor(child)
        return f"({s})" if _dprec(child) <= level else s

    if isinstance(o, DConst):
        return "true" if o.value else "false"
    op = "=" if getattr(o, "positive", True) else "!="
    if isinstance(o, ChanAtom):
        return f"ch {op} {o.ch}"
    if isinstance(o, DataAtom):
        return f"d({o.name}) {op} {o.value}"
    if isinstance(o, SenderAtom):
        return f"sender {op} {o.agent}"
    if isinstance(o, CvAtom):
        return f"@{o.name} {op} {o.value}"
    if isinstance(o, DAnd):
        return f"{wrap(o.left, 1)} & {wrap(o.right, 2)}"
    if isinstance(o, DOr):
        return f"{wrap(o.left, 0)} | {wrap(o.right, 1)}"
    if isinstance(o, Exists):
        return f"some({format_descriptor(o.body)})"
    if isinstance(o, Forall):
        return f"all({format_descriptor(o.body)})"
    raise TypeError(o)


def _fprec(f):
    if isinstance(f, FOr):
        return 1
    if isinstance(f, FAnd):
        return 2
    return 3


def format_formula(f: Formula) -> str:
    def wrap(child, level):
        s = format_formula(child)
        return f"({s})" if _fprec(child) <= level else s

    if isinstance(f, FConst):
        return "true" if f.value else "false"
    if isinstance(f, Prop):
        return f"{f.var} {'=' if f.positive else '!='} {f.value}"
    if isinstance(f, FOr):
        return f"{wrap(f.left, 0)} | {wrap(f.right, 1)}"
    if isinstance(f, FAnd):
        return f"{wrap(f.left, 1)} & {wrap(f.right, 2)}"
    if isinstance(f, Until):
        return f"({wrap(f.left, 2)} U {wrap(f.right, 2)})"
    if isinstance(f, Release):
        return f"({wrap(f.left, 2)} R {wrap(f.right, 2)})"
    if isinstance(f, Diamond):
        return f"<{format_descriptor(f.obs)}> {wrap(f.body, 2)}"
    if isinstance(f, Box):
        return f"[{format_descriptor(f.obs)}] {wrap(f.body, 2)}"
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Descriptor semantics


def _single_models(o: Descriptor, m: Message, c: dict) -> bool:
    """Truth of ``o`` on the message whose predicate is the singleton ``{c}``."""
    if isinstance(o, DConst):
        return o.value
    if isinstance(o, ChanAtom):
        return (m.ch == o.ch) == o.positive
    if isinstance(o, DataAtom):
        return (m.data_dict.get(o.name) == o.value) == o.positive
    if isinstance(o, SenderAtom):
        return (m.sender == o.agent) == o.positive
    if isinstance(o, CvAtom):
        return (c[o.name] == o.value) == o.positive
    if isinstance(o, DAnd):
        return _single_models(o.left, m, c) and _single_models(o.right, m, c)
    if isinstance(o, DOr):
        return _single_models(o.left, m, c) or _single_models(o.right, m, c)
    if isinstance(o, (Exists, Forall)):
        # over a singleton both quantifiers reduce to their body
        return _single_models(o.body, m, c)
    raise TypeError(o)


def pi_models(m: Message, cv_decls: Sequence) -> list:
    names = [d.name for d in cv_decls]
    return [dict(zip(names, t)) for t in cv_model_tuples(m.pi, tuple(cv_decls))]


def message_models(m: Message, o: Descriptor, cv_decls: Sequence, _models=None) -> bool:
    """m |= o.

    ``cv_decls`` fixes the common-variable universe the predicate ranges over.
    An unsatisfiable predicate makes every ``all(...)`` true and every
    ``some(...)`` false.
    """
    if _models is None:
        _models = pi_models(m, cv_decls)
    if isinstance(o, DConst):
        return o.value
    if isinstance(o, ChanAtom):
        return (m.ch == o.ch) == o.positive
    if isinstance(o, DataAtom):
        return (m.data_dict.get(o.name) == o.value) == o.positive
    if isinstance(o, SenderAtom):
        return (m.sender == o.agent) == o.positive
    if isinstance(o, CvAtom):
        if o.positive:
            return all(c[o.name] == o.value for c in _models)
        return any(c[o.name] != o.value for c in _models)
    if isinstance(o, DAnd):
        return (message_models(m, o.left, cv_decls, _models)
                and message_models(m, o.right, cv_decls, _models))
    if isinstance(o, DOr):
        return (message_models(m, o.left, cv_decls, _models)
                or message_models(m, o.right, cv_decls, _models))
    if isinstance(o, Exists):
        return any(_single_models(o.body, m, c) for c in _models)
    if isinstance(o, Forall):
        return all(_single_models(o.body, m, c) for c in _models)
    raise TypeError(o)


class ObservationTable:
    """Memoized evaluation of a fixed observation set against messages."""

    def __init__(self, observations: Sequence[Descriptor], cv_decls: Sequence):
        self.observations = tuple(observations)
        self.cv_decls = tuple(cv_decls)
        self._cache: dict = {}

    def letter(self, m: Message) -> frozenset:
        """The unique letter (set of observation indices) that m matches."""
        hit = self._cache.get(m)
        if hit is None:
            models = pi_models(m, self.cv_decls)
            hit = frozenset(i for i, o in enumerate(self.observations)
                            if message_models(m, o, self.cv_decls, models))
            self._cache[m] = hit
        return hit


def letter_models(m: Message, letter, observations: Sequence[Descriptor], cv_decls) -> bool:
    """m belongs to M(letter): it satisfies exactly the descriptors in letter.

    ``letter`` is a collection of descriptors drawn from ``observations``.
    """
    chosen = set(letter)
    models = pi_models(m, cv_decls)
    return all(message_models(m, o, cv_decls, models) == (o in chosen) for o in observations)


# ---------------------------------------------------------------------------
# Letter satisfiability (guess and verify)


@dataclass(frozen=True)
class _QAtom:
    kind: str  # 'E' or 'A'
    mask: tuple  # truth per CV assignment


def _reduce(o: Descriptor, ch, data: dict, sender, cvs, atoms: list):
    """Fix the channel, data and sender; leave a positive combination of
    quantifier atoms.  Returns a nested tuple tree or a bool."""
    if isinstance(o, DConst):
        return o.value
    if isinstance(o, ChanAtom):
        return (ch == o.ch) == o.positive
    if isinstance(o, DataAtom):
        return (data.get(o.name) == o.value) == o.positive
    if isinstance(o, SenderAtom):
        return (sender == o.agent) == o.positive
    if isinstance(o, CvAtom):
        return _reduce(Forall(o) if o.positive else Exists(o), ch, data, sender, cvs, atoms)
    if isinstance(o, (DAnd, DOr)):
        l = _reduce(o.left, ch, data, sender, cvs, atoms)
        r = _reduce(o.right, ch, data, sender, cvs, atoms)
        if isinstance(o, DAnd):
            if l is False or r is False:
                return False
            if l is True:
                return r
            if r is True:
                return l
            return ("and", l, r)
        if l is True or r is True:
            return True
        if l is False:
            return r
        if r is False:
            return l
        return ("or", l, r)
    if isinstance(o, (Exists, Forall)):
        stub = Message(ch, tuple(sorted(data.items())), sender, None)
        mask = tuple(_single_models(o.body, stub, c) for c in cvs)
        atom = _QAtom("E" if isinstance(o, Exists) else "A", mask)
        if atom not in atoms:
            atoms.append(atom)
        return ("q", atoms.index(atom))
    raise TypeError(o)


def _eval_tree(t, chosen):
    if t is True or t is False:
        return t
    if t[0] == "q":
        return t[1] in chosen
    if t[0] == "and":
        return _eval_tree(t[1], chosen) and _eval_tree(t[2], chosen)
    return _eval_tree(t[1], chosen) or _eval_tree(t[2], chosen)


def _witness_set(atoms, chosen, n):
    """CV assignment indices realising the chosen atoms, or None."""
    universal = [True] * n
    for i in chosen:
        if atoms[i].kind == "A":
            universal = [u and v for u, v in zip(universal, atoms[i].mask)]
    picks = []
    for i in sorted(chosen):
        if atoms[i].kind == "E":
            j = next((j for j in range(n) if atoms[i].mask[j] and universal[j]), None)
            if j is None:
                return None
            if j not in picks:
                picks.append(j)
    return sorted(picks)


def descriptor_satisfiable(o: Descriptor, system: SystemDef) -> Optional[Message]:
    """Some message satisfying ``o``, or None.

    For every choice of channel, data and sender the descriptor collapses to a
    positive combination of quantifier atoms.  A subset S of those atoms is
    guessed; it is realisable iff each existential atom in S has a witness
    assignment that satisfies every universal atom in S.  The witness
    predicate is the characteristic formula of the chosen assignments.
    """
    cv_decls = tuple(system.common)
    cvs = [dict(zip([d.name for d in cv_decls], t)) for t in iter_cv_assignments(cv_decls)]
    n = len(cvs)
    for ch in system.channels:
        for data in system.data_assignments():
            dd = dict(data)
            for sender in system.agent_names:
                atoms: list = []
                tree = _reduce(o, ch, dd, sender, cvs, atoms)
                if tree is False:
                    continue
                for size in range(len(atoms) + 1):
                    for chosen in itertools.combinations(range(len(atoms)), size):
                        chosen = set(chosen)
                        if not _eval_tree(tree, chosen):
                            continue
                        picks = _witness_set(atoms, chosen, n)
                        if picks is None:
                            continue
                        tuples = [tuple(cvs[j][d.name] for d in cv_decls) for j in picks]
                        pi = characteristic(tuples, cv_decls)
                        return Message(ch, data, sender, pi)
    return None


def conjoin(descs: Iterable[Descriptor]) -> Descriptor:
    out = None
    for d in descs:
        out = d if out is None else DAnd(out, d)
    return D_TRUE if out is None else out


def guard_satisfiable(inside: Iterable[Descriptor], outside: Iterable[Descriptor],
                      system: SystemDef) -> Optional[Message]:
    """A message satisfying every descriptor of ``inside`` and none of ``outside``."""
    parts = list(inside) + [dual_descriptor(o) for o in outside]
    return descriptor_satisfiable(conjoin(parts), system)


def letter_satisfiable(letter, observations: Sequence[Descriptor], system: SystemDef):
    """(satisfiable, witness) for the letter over the given observation set."""
    chosen = set(letter)
    m = guard_satisfiable([o for o in observations if o in chosen],
                          [o for o in observations if o not in chosen], system)
    return m is not None, m


# ---------------------------------------------------------------------------
# Evaluation on lassos


@dataclass(frozen=True)
class Lasso:
    """An ultimately periodic computation: stem then loop forever.

    Each position is ``(valuation, message)`` where valuation maps
    ``agent.var`` to a value.
    """

    stem: tuple
    loop: tuple

    def __post_init__(self):
        if not self.loop:
            raise ValueError("a lasso needs a non-empty loop")

    @property
    def positions(self):
        return self.stem + self.loop

    def successor(self, i):
        return i + 1 if i + 1 < len(self.stem) + len(self.loop) else len(self.stem)


def eval_formula(f: Formula, lasso: Lasso, cv_decls: Sequence) -> bool:
    """Truth of ``f`` at position 0, by fixpoint iteration over the lasso."""
    pos = lasso.positions
    n = len(pos)
    nxt = [lasso.successor(i) for i in range(n)]
    model_cache: dict = {}

    def sat(m, o):
        key = (m, o)
        if key not in model_cache:
            model_cache[key] = message_models(m, o, cv_decls)
        return model_cache[key]

    values: dict = {}
    for g in bottom_up(f):
        if isinstance(g, FConst):
            v = [g.value] * n
        elif isinstance(g, Prop):
            v = [(val.get(g.var) == g.value) == g.positive for val, _ in pos]
        elif isinstance(g, FAnd):
            a, b = values[g.left], values[g.right]
            v = [x and y for x, y in zip(a, b)]
        elif isinstance(g, FOr):
            a, b = values[g.left], values[g.right]
            v = [x or y for x, y in zip(a, b)]
        elif isinstance(g, Diamond):
            b = values[g.body]
            v = [sat(pos[i][1], g.obs) and b[nxt[i]] for i in range(n)]
        elif isinstance(g, Box):
            b = values[g.body]
            v = [(not sat(pos[i][1], g.obs)) or b[nxt[i]] for i in range(n)]
        elif isinstance(g, (Until, Release)):
            a, b = values[g.left], values[g.right]
            until = isinstance(g, Until)
            v = [not until] * n
            changed = True
            while changed:
                changed = False
                for i in reversed(range(n)):
                    if until:
                        new = b[i] or (a[i] and v[nxt[i]])
                    else:
                        new = b[i] and (a[i] or v[nxt[i]])
                    if new != v[i]:
                        v[i] = new
                        changed = True
        else:
            raise TypeError(g)
        values[g] = v
    return values[f][0]
