"""Finite-domain variables, assertions, and their (partial) evaluation.

Every other module consumes the types defined here.  Values are plain
strings (``"0"``, ``"pnd"``, ``"true"``); Booleans are the two-valued
domain ``("false", "true")``.

Assertions are immutable trees.  An *environment* is a plain ``dict`` keyed
by term keys:

    ('s', name)   current value of a local variable
    ('n', name)   next (primed) value of a local variable
    ('d', name)   data variable carried by a message
    ('ch',)       the channel
    ('cv', name)  a common variable

Partial evaluation is compositional, ``pe(pe(a, e1), e2) == pe(a, e1 | e2)``,
which the constraint search in :func:`solve` relies on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Optional, Sequence

STAR = "*"
BOOL_VALUES = ("false", "true")

Env = Mapping[tuple, str]


class ModelError(Exception):
    pass


class UnboundVariable(ModelError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"unbound variable {format_key(key)}")


class TypeMismatch(ModelError):
    pass


class ValidationError(ModelError):
    """A loaded system violates a semantic requirement.

    ``witness`` names the offending valuation when there is one.
    """

    def __init__(self, message, agent=None, witness=None, span=None):
        self.agent = agent
        self.witness = witness
        self.span = span
        super().__init__(message)


def format_key(key) -> str:
    kind = key[0]
    if kind == "s":
        return key[1]
    if kind == "n":
        return key[1] + "'"
    if kind == "d":
        return f"d({key[1]})"
    if kind == "ch":
        return "ch"
    return "@" + key[1]


# ---------------------------------------------------------------------------
# Domains and declarations


@dataclass(frozen=True)
class Domain:
    name: str
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ModelError(f"domain {self.name or '<anonymous>'} is empty")
        if len(set(self.values)) != len(self.values):
            raise ModelError(f"domain {self.name or '<anonymous>'} repeats a value")

    def __contains__(self, value):
        return value in self.values

    def __len__(self):
        return len(self.values)

    @property
    def is_bool(self):
        return self.values == BOOL_VALUES


BOOL = Domain("bool", BOOL_VALUES)


@dataclass(frozen=True)
class VarDecl:
    name: str
    domain: Domain
    kind: str = "local"  # local | common | data
    span: object = field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Lit:
    value: str
    key = None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Var:
    name: str
    primed: bool = False

    @property
    def key(self):
        return ("n" if self.primed else "s", self.name)

    def __str__(self):
        return self.name + ("'" if self.primed else "")


@dataclass(frozen=True)
class DataRef:
    name: str

    @property
    def key(self):
        return ("d", self.name)

    def __str__(self):
        return f"d({self.name})"


@dataclass(frozen=True)
class ChanRef:
    key = ("ch",)

    def __str__(self):
        return "ch"


@dataclass(frozen=True)
class CvRef:
    name: str

    @property
    def key(self):
        return ("cv", self.name)

    def __str__(self):
        return "@" + self.name


def _resolve(term, env):
    if term.key is None:
        return term.value
    return env.get(term.key)


# ---------------------------------------------------------------------------
# Assertions


class Assertion:
    """Base class; concrete nodes are frozen dataclasses."""

    __slots__ = ()

    def pe(self, env: Env, cv_decls=None) -> "Assertion":
        raise NotImplementedError

    def ev(self, env: Env, cv_decls=None) -> bool:
        raise NotImplementedError

    def free(self) -> frozenset:
        raise NotImplementedError

    def __str__(self):
        return format_assertion(self)


@dataclass(frozen=True)
class Const(Assertion):
    value: bool

    def pe(self, env, cv_decls=None):
        return self

    def ev(self, env, cv_decls=None):
        return self.value

    def free(self):
        return frozenset()


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Cmp(Assertion):
    op: str  # '=' or '!='
    left: object
    right: object

    def pe(self, env, cv_decls=None):
        lv = _resolve(self.left, env)
        rv = _resolve(self.right, env)
        if lv is not None and rv is not None:
            return TRUE if (lv == rv) == (self.op == "=") else FALSE
        left = self.left if lv is None else Lit(lv)
        right = self.right if rv is None else Lit(rv)
        if left == right:
            return TRUE if self.op == "=" else FALSE
        if left is self.left and right is self.right:
            return self
        return Cmp(self.op, left, right)

    def ev(self, env, cv_decls=None):
        lv = _resolve(self.left, env)
        if lv is None:
            raise UnboundVariable(self.left.key)
        rv = _resolve(self.right, env)
        if rv is None:
            raise UnboundVariable(self.right.key)
        return (lv == rv) == (self.op == "=")

    def free(self):
        return frozenset(t.key for t in (self.left, self.right) if t.key is not None)


@dataclass(frozen=True)
class Atom(Assertion):
    """A Boolean-valued term used as a formula (``asgn`` means asgn = true)."""

    term: object

    def pe(self, env, cv_decls=None):
        v = _resolve(self.term, env)
        if v is None:
            return self
        return TRUE if v == "true" else FALSE

    def ev(self, env, cv_decls=None):
        v = _resolve(self.term, env)
        if v is None:
            raise UnboundVariable(self.term.key)
        return v == "true"

    def free(self):
        return frozenset([self.term.key]) if self.term.key is not None else frozenset()


@dataclass(frozen=True)
class Not(Assertion):
    arg: Assertion

    def pe(self, env, cv_decls=None):
        a = self.arg.pe(env, cv_decls)
        if isinstance(a, Const):
            return FALSE if a.value else TRUE
        if a is self.arg:
            return self
        return Not(a)

    def ev(self, env, cv_decls=None):
        return not self.arg.ev(env, cv_decls)

    def free(self):
        return self.arg.free()


@dataclass(frozen=True)
class And(Assertion):
    args: tuple

    def pe(self, env, cv_decls=None):
        out = []
        changed = False
        for a in self.args:
            r = a.pe(env, cv_decls)
            if r is FALSE or r == FALSE:
                return FALSE
            if r is not a or isinstance(r, Const):
                changed = True
            out.append(r)
        if not changed:
            return self
        return conj(out)

    def ev(self, env, cv_decls=None):
        return all(a.ev(env, cv_decls) for a in self.args)

    def free(self):
        return frozenset().union(*(a.free() for a in self.args))


@dataclass(frozen=True)
class Or(Assertion):
    args: tuple

    def pe(self, env, cv_decls=None):
        out = []
        changed = False
        for a in self.args:
            r = a.pe(env, cv_decls)
            if r == TRUE:
                return TRUE
            if r is not a or isinstance(r, Const):
                changed = True
            out.append(r)
        if not changed:
            return self
        return disj(out)

    def ev(self, env, cv_decls=None):
        return any(a.ev(env, cv_decls) for a in self.args)

    def free(self):
        return frozenset().union(*(a.free() for a in self.args))


@dataclass(frozen=True)
class Implies(Assertion):
    left: Assertion
    right: Assertion

    def pe(self, env, cv_decls=None):
        lhs = self.left.pe(env, cv_decls)
        if lhs == FALSE:
            return TRUE
        rhs = self.right.pe(env, cv_decls)
        if lhs == TRUE:
            return rhs
        if rhs == TRUE:
            return TRUE
        if rhs == FALSE:
            return Not(lhs)
        if lhs is self.left and rhs is self.right:
            return self
        return Implies(lhs, rhs)

    def ev(self, env, cv_decls=None):
        return (not self.left.ev(env, cv_decls)) or self.right.ev(env, cv_decls)

    def free(self):
        return self.left.free() | self.right.free()


@dataclass(frozen=True)
class Keep(Assertion):
    """Frame condition: every listed local variable keeps its value."""

    names: tuple

    def expand(self) -> Assertion:
        return conj(Cmp("=", Var(n), Var(n, True)) for n in self.names)

    def pe(self, env, cv_decls=None):
        if not any(("s", n) in env or ("n", n) in env for n in self.names):
            return self
        return self.expand().pe(env, cv_decls)

    def ev(self, env, cv_decls=None):
        return self.expand().ev(env, cv_decls)

    def free(self):
        return frozenset(k for n in self.names for k in (("s", n), ("n", n)))


@dataclass(frozen=True)
class Quant(Assertion):
    """Quantification over the whole set of common variables."""

    kind: str  # 'exists' | 'forall'
    body: Assertion

    def _inner_env(self, env):
        return {k: v for k, v in env.items() if k[0] != "cv"}

    def pe(self, env, cv_decls=None):
        inner = self._inner_env(env)
        if cv_decls is None:
            b = self.body.pe(inner)
            if isinstance(b, Const):
                return b
            return self if b is self.body else Quant(self.kind, b)
        parts = []
        for c in iter_cv_assignments(tuple(cv_decls)):
            e = dict(inner)
            e.update((("cv", d.name), v) for d, v in zip(cv_decls, c))
            parts.append(self.body.pe(e, cv_decls))
        return disj(parts) if self.kind == "exists" else conj(parts)

    def ev(self, env, cv_decls=None):
        if cv_decls is None:
            raise ModelError("quantifier evaluation needs the common-variable declarations")
        inner = self._inner_env(env)
        results = []
        for c in iter_cv_assignments(tuple(cv_decls)):
            e = dict(inner)
            e.update((("cv", d.name), v) for d, v in zip(cv_decls, c))
            results.append(self.body.ev(e, cv_decls))
            if self.kind == "exists" and results[-1]:
                return True
            if self.kind == "forall" and not results[-1]:
                return False
        return self.kind == "forall"

    def free(self):
        return frozenset(k for k in self.body.free() if k[0] != "cv")


def conj(parts: Iterable[Assertion]) -> Assertion:
    """Flattening, simplifying conjunction."""
    out = []
    for p in parts:
        if p == TRUE:
            continue
        if p == FALSE:
            return FALSE
        if isinstance(p, And):
            out.extend(p.args)
        else:
            out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(parts: Iterable[Assertion]) -> Assertion:
    """Flattening, simplifying disjunction."""
    out = []
    for p in parts:
        if p == FALSE:
            continue
        if p == TRUE:
            return TRUE
        if isinstance(p, Or):
            out.extend(p.args)
        else:
            out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def partial_eval(assertion: Assertion, env: Env, cv_decls=None) -> Assertion:
    return assertion.pe(env, cv_decls)


def evaluate(assertion: Assertion, env: Env, cv_decls=None) -> bool:
    """Truth value of ``assertion`` under ``env``.

    Raises :class:`UnboundVariable` naming the first free variable that ``env``
    does not bind.
    """
    return assertion.ev(env, cv_decls)


def make_env(state=None, next=None, data=None, ch=None, cv=None) -> dict:
    env = {}
    if state:
        env.update((("s", k), v) for k, v in state.items())
    if next:
        env.update((("n", k), v) for k, v in next.items())
    if data:
        env.update((("d", k), v) for k, v in data.items())
    if ch is not None:
        env[("ch",)] = ch
    if cv:
        env.update((("cv", k), v) for k, v in cv.items())
    return env


# ---------------------------------------------------------------------------
# Printing


_PREC = {"implies": 1, "or": 2, "and": 3, "not": 4, "atom": 5}


def _prec(a):
    if isinstance(a, Implies):
        return 1
    if isinstance(a, Or):
        return 2
    if isinstance(a, And):
        return 3
    if isinstance(a, Not):
        return 4
    return 5


def format_assertion(a: Assertion) -> str:
    def wrap(child, level):
        s = format_assertion(child)
        return f"({s})" if _prec(child) <= level else s

    if isinstance(a, Const):
        return "true" if a.value else "false"
    if isinstance(a, Cmp):
        return f"{a.left} {a.op} {a.right}"
    if isinstance(a, Atom):
        return str(a.term)
    if isinstance(a, Not):
        return "!" + wrap(a.arg, 4)
    if isinstance(a, And):
        return " & ".join(wrap(x, 3) for x in a.args)
    if isinstance(a, Or):
        return " | ".join(wrap(x, 2) for x in a.args)
    if isinstance(a, Implies):
        return f"{wrap(a.left, 1)} -> {wrap(a.right, 0)}"
    if isinstance(a, Keep):
        return f"keep({', '.join(a.names)})"
    if isinstance(a, Quant):
        return f"{a.kind}({format_assertion(a.body)})"
    raise TypeError(f"not an assertion: {a!r}")


# ---------------------------------------------------------------------------
# Enumeration


def enumerate_assignments(decls: Sequence[VarDecl]) -> Iterator[dict]:
    """Every total assignment to ``decls``, lexicographic in declaration order."""
    names = [d.name for d in decls]
    for combo in itertools.product(*(d.domain.values for d in decls)):
        yield dict(zip(names, combo))


def assignment_tuples(decls: Sequence[VarDecl]) -> Iterator[tuple]:
    return itertools.product(*(d.domain.values for d in decls))


@lru_cache(maxsize=None)
def iter_cv_assignments(cv_decls: tuple) -> tuple:
    return tuple(itertools.product(*(d.domain.values for d in cv_decls)))


@lru_cache(maxsize=65536)
def _cv_model_mask(pi: Assertion, cv_decls: tuple) -> tuple:
    names = [d.name for d in cv_decls]
    out = []
    for c in iter_cv_assignments(cv_decls):
        env = {("cv", n): v for n, v in zip(names, c)}
        out.append(pi.ev(env, cv_decls))
    return tuple(out)


def models_of_cv(pi: Assertion, cv_decls: Sequence[VarDecl]) -> Iterator[dict]:
    """Stream the common-variable assignments satisfying ``pi``."""
    cv_decls = tuple(cv_decls)
    names = [d.name for d in cv_decls]
    for c, ok in zip(iter_cv_assignments(cv_decls), _cv_model_mask(pi, cv_decls)):
        if ok:
            yield dict(zip(names, c))


def cv_model_tuples(pi: Assertion, cv_decls: tuple) -> tuple:
    """Satisfying assignments of ``pi`` as tuples in declaration order (cached)."""
    return tuple(
        c for c, ok in zip(iter_cv_assignments(cv_decls), _cv_model_mask(pi, cv_decls)) if ok
    )


def satisfiable_cv(pi: Assertion, cv_decls: Sequence[VarDecl]) -> bool:
    return any(_cv_model_mask(pi, tuple(cv_decls)))


def characteristic(models: Iterable[tuple], cv_decls: Sequence[VarDecl]) -> Assertion:
    """Quantifier-free predicate whose models are exactly ``models``."""
    return disj(
        conj(Cmp("=", CvRef(d.name), Lit(v)) for d, v in zip(cv_decls, c)) for c in models
    )


# ---------------------------------------------------------------------------
# Constraint search


def _forced(res, index):
    """Slot bindings ``{slot: value}`` fixed by conjuncts of ``res``.

    Returns None when two conjuncts disagree on a slot.
    """
    out: dict = {}
    args = res.args if isinstance(res, And) else (res,)
    for a in args:
        hit = None
        if isinstance(a, Cmp) and a.op == "=":
            if a.left.key in index and a.right.key is None:
                hit = index[a.left.key], a.right.value
            elif a.right.key in index and a.left.key is None:
                hit = index[a.right.key], a.left.value
        elif isinstance(a, Atom) and a.term.key in index:
            hit = index[a.term.key], "true"
        elif isinstance(a, Not) and isinstance(a.arg, Atom) and a.arg.term.key in index:
            hit = index[a.arg.term.key], "false"
        if hit is not None:
            i, v = hit
            if out.get(i, v) != v:
                return None
            out[i] = v
    return out


def solve(assertion: Assertion, env: Env, slots: Sequence[tuple], cv_decls=None,
          first_only=False) -> list:
    """All value tuples for ``slots`` that, with ``env``, satisfy ``assertion``.

    ``slots`` is a sequence of ``(key, values)``.  The search splits on
    disjunctions, binds slots that a conjunct fixes, and otherwise branches on
    one slot at a time, partially evaluating the residual and pruning as soon
    as it collapses to false.  Results are returned in lexicographic order of
    slot values.
    """
    residual = assertion.pe(env, cv_decls)
    found: dict = {}
    index = {key: i for i, (key, _) in enumerate(slots)}

    class _Done(Exception):
        pass

    def emit(bound):
        open_slots = [i for i in range(len(slots)) if i not in bound]
        for combo in itertools.product(*(slots[i][1] for i in open_slots)):
            full = dict(bound)
            full.update(zip(open_slots, combo))
            found[tuple(full[i] for i in range(len(slots)))] = None
            if first_only:
                raise _Done

    def search(res, bound):
        if res is FALSE or res == FALSE:
            return
        if res is TRUE or res == TRUE:
            emit(bound)
            return
        if isinstance(res, Or):
            for a in res.args:
                search(a, bound)
            return
        forced = _forced(res, index)
        if forced is None:
            return
        if forced:
            if any(v not in slots[i][1] for i, v in forced.items()):
                return
            search(res.pe({slots[i][0]: v for i, v in forced.items()}, cv_decls),
                   {**bound, **forced})
            return
        free = res.free()
        pick = next((i for i in range(len(slots)) if i not in bound and slots[i][0] in free), None)
        if pick is None:
            missing = next(iter(sorted(k for k in free if k not in index)))
            raise UnboundVariable(missing)
        key = slots[pick][0]
        for v in slots[pick][1]:
            search(res.pe({key: v}, cv_decls), {**bound, pick: v})

    try:
        search(residual, {})
    except _Done:
        pass
    results = list(found)
    order = [{v: j for j, v in enumerate(vals)} for _, vals in slots]
    results.sort(key=lambda t: tuple(o[v] for o, v in zip(order, t)))
    return results


# ---------------------------------------------------------------------------
# Agents, systems, messages


@dataclass(frozen=True)
class AgentDef:
    name: str
    vars: tuple
    relabel: tuple  # ((common name, local name), ...) in common-variable order
    init: Assertion
    send_guard: Assertion
    recv_guard: Assertion
    send_rel: Assertion
    recv_rel: Assertion
    span: object = field(default=None, compare=False, repr=False)

    @property
    def var_names(self) -> tuple:
        return tuple(v.name for v in self.vars)

    def var(self, name) -> VarDecl:
        for v in self.vars:
            if v.name == name:
                return v
        raise KeyError(name)

    def state_dict(self, state: tuple) -> dict:
        return dict(zip(self.var_names, state))

    def state_env(self, state: tuple) -> dict:
        return {("s", n): v for n, v in zip(self.var_names, state)}

    def relabeled_cv(self, state: tuple, cv_decls) -> dict:
        """Common-variable view of ``state`` through the renaming f."""
        local = dict(zip(self.var_names, state))
        ren = dict(self.relabel)
        return {("cv", d.name): local[ren[d.name]] for d in cv_decls}

    def states(self) -> Iterator[tuple]:
        return assignment_tuples(self.vars)


@dataclass(frozen=True)
class SystemDef:
    channels: tuple
    common: tuple
    data: tuple
    agents: tuple
    domains: tuple = ()  # named domains, kept for printing
    name: str = ""

    def agent(self, name) -> AgentDef:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)

    @property
    def agent_names(self) -> tuple:
        return tuple(a.name for a in self.agents)

    def data_assignments(self) -> tuple:
        return _data_assignments(self.data)


@lru_cache(maxsize=None)
def _data_assignments(data_decls: tuple) -> tuple:
    names = [d.name for d in data_decls]
    return tuple(tuple(zip(names, combo)) for combo in assignment_tuples(data_decls))


@dataclass(frozen=True)
class Message:
    """An observation: channel, data, sender identity and sender predicate."""

    ch: str
    data: tuple  # ((name, value), ...) in data-declaration order
    sender: str
    pi: Assertion

    @property
    def data_dict(self) -> dict:
        return dict(self.data)

    def to_json(self) -> dict:
        return {
            "ch": self.ch,
            "d": dict(self.data),
            "sender": self.sender,
            "pi": format_assertion(self.pi),
        }

    def sort_key(self):
        return (self.sender, self.ch, self.data, format_assertion(self.pi))


def send_predicate(agent: AgentDef, state: tuple, ch: str, data: tuple) -> Assertion:
    """The sender predicate obtained from g_s by fixing state, channel and data."""
    env = agent.state_env(state)
    env[("ch",)] = ch
    env.update((("d", k), v) for k, v in data)
    return agent.send_guard.pe(env)


# ---------------------------------------------------------------------------
# Validation


_ALLOWED = {
    "init": {"s"},
    "recv_guard": {"s", "ch"},
    "send_guard": {"s", "ch", "d", "cv"},
    "send_rel": {"s", "n", "d", "ch"},
    "recv_rel": {"s", "n", "d", "ch"},
}


def _domain_of(term, agent: AgentDef, system: SystemDef):
    if isinstance(term, Lit):
        return None
    if isinstance(term, Var):
        return agent.var(term.name).domain.values
    if isinstance(term, DataRef):
        return next(d.domain.values for d in system.data if d.name == term.name)
    if isinstance(term, CvRef):
        return next(d.domain.values for d in system.common if d.name == term.name)
    return system.channels


def _walk(a):
    yield a
    for child in getattr(a, "args", ()):
        yield from _walk(child)
    for attr in ("arg", "left", "right", "body"):
        child = getattr(a, attr, None)
        if isinstance(child, Assertion):
            yield from _walk(child)


def check_assertion(a: Assertion, role: str, agent: AgentDef, system: SystemDef) -> None:
    """Static checks: declared names, allowed variable kinds, in-domain constants."""
    locals_ = set(agent.var_names)
    datas = {d.name for d in system.data}
    cvs = {d.name for d in system.common}
    allowed = _ALLOWED[role]
    for node in _walk(a):
        terms = []
        if isinstance(node, Cmp):
            terms = [node.left, node.right]
        elif isinstance(node, Atom):
            terms = [node.term]
        elif isinstance(node, Keep):
            for n in node.names:
                if n not in locals_:
                    raise ValidationError(f"{agent.name}.{role}: keep of undeclared variable {n}",
                                          agent=agent.name)
            if "n" not in allowed:
                raise ValidationError(f"{agent.name}.{role}: keep outside a transition relation",
                                      agent=agent.name)
        elif isinstance(node, Quant) and "cv" not in allowed:
            raise ValidationError(f"{agent.name}.{role}: quantifier over common variables not allowed",
                                  agent=agent.name)
        for t in terms:
            if isinstance(t, Lit):
                continue
            kind = t.key[0]
            if kind not in allowed:
                raise ValidationError(f"{agent.name}.{role}: {t} may not appear here",
                                      agent=agent.name)
            if isinstance(t, Var) and t.name not in locals_:
                raise ValidationError(f"{agent.name}.{role}: undeclared variable {t.name}",
                                      agent=agent.name)
            if isinstance(t, DataRef) and t.name not in datas:
                raise ValidationError(f"{agent.name}.{role}: undeclared data variable {t.name}",
                                      agent=agent.name)
            if isinstance(t, CvRef) and t.name not in cvs:
                raise ValidationError(f"{agent.name}.{role}: undeclared common variable {t.name}",
                                      agent=agent.name)
        if isinstance(node, Atom):
            dom = _domain_of(node.term, agent, system)
            if dom is not None and tuple(dom) != BOOL_VALUES:
                raise TypeMismatch(f"{agent.name}.{role}: {node.term} is not Boolean")
        if isinstance(node, Cmp):
            ld = _domain_of(node.left, agent, system)
            rd = _domain_of(node.right, agent, system)
            if ld is not None and isinstance(node.right, Lit) and node.right.value not in ld:
                raise TypeMismatch(f"{agent.name}.{role}: {node.right} is not a value of {node.left}")
            if rd is not None and isinstance(node.left, Lit) and node.left.value not in rd:
                raise TypeMismatch(f"{agent.name}.{role}: {node.left} is not a value of {node.right}")
            if ld is not None and rd is not None and not set(ld) & set(rd):
                raise TypeMismatch(f"{agent.name}.{role}: {node.left} and {node.right} have disjoint domains")


def validate_agent(agent: AgentDef, system: SystemDef) -> None:
    """Structural checks plus the two semantic requirements on every agent.

    * the receive guard holds on the broadcast channel in every state;
    * the receive relation is broadcast input-enabled (checked exhaustively).
    """
    for role in _ALLOWED:
        check_assertion(getattr(agent, role), role, agent, system)
    cv_names = [d.name for d in system.common]
    ren = dict(agent.relabel)
    for cv in cv_names:
        if cv not in ren:
            raise ValidationError(f"agent {agent.name} does not relabel common variable {cv}",
                                  agent=agent.name, span=agent.span)
        if ren[cv] not in agent.var_names:
            raise ValidationError(f"agent {agent.name} relabels {cv} to undeclared {ren[cv]}",
                                  agent=agent.name, span=agent.span)
        cv_dom = next(d.domain.values for d in system.common if d.name == cv)
        if tuple(agent.var(ren[cv]).domain.values) != tuple(cv_dom):
            raise TypeMismatch(f"agent {agent.name}: {ren[cv]} and @{cv} have different domains")

    g = agent.recv_guard.pe({("ch",): STAR})
    if g != TRUE:
        for st in agent.states():
            if not g.ev(agent.state_env(st)):
                raise ValidationError(
                    f"agent {agent.name}: receive guard is false on * in state "
                    f"{agent.state_dict(st)}", agent=agent.name, witness=agent.state_dict(st),
                    span=agent.span)
    _check_input_enabled(agent, system)


_INPUT_ENABLED: dict = {}


def _check_input_enabled(agent: AgentDef, system: SystemDef) -> None:
    # agents that differ only in their name share the verdict
    key = (agent.recv_rel, agent.vars, system.data)
    if key in _INPUT_ENABLED:
        witness = _INPUT_ENABLED[key]
    else:
        witness = _input_enabled_witness(agent, system)
        _INPUT_ENABLED[key] = witness
    if witness is not None:
        st, d = witness
        raise ValidationError(
            f"agent {agent.name} is not broadcast input-enabled: no receive successor "
            f"in state {agent.state_dict(st)} for data {dict(d)}",
            agent=agent.name, witness={"state": agent.state_dict(st), "data": dict(d)},
            span=agent.span)


def _input_enabled_witness(agent: AgentDef, system: SystemDef):
    data_slots = [(("d", d.name), d.domain.values) for d in system.data]
    slots = data_slots + [(("n", v.name), v.domain.values) for v in agent.vars]
    base = agent.recv_rel.pe({("ch",): STAR})
    datas = system.data_assignments()
    nd = len(data_slots)
    for st in agent.states():
        res = base.pe(agent.state_env(st))
        if res == TRUE:
            continue
        covered = {sol[:nd] for sol in solve(res, {}, slots)}
        for d in datas:
            if tuple(v for _, v in d) not in covered:
                return st, d
    return None


def validate_system(system: SystemDef) -> None:
    if STAR not in system.channels:
        raise ValidationError("the broadcast channel * must be declared")
    if not system.agents:
        raise ValidationError("a system needs at least one agent")
    names = [a.name for a in system.agents]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise ValidationError(f"duplicate agent identities: {sorted(dup)}")
    for agent in system.agents:
        validate_agent(agent, system)
