"""Channelled transition systems: agent semantics, composition, exploration.

A CTS here is lazy: it answers ``sends(s)``, ``receives(s, label, ch)`` and
``listening(s)`` on demand and memoizes.  Transition labels carry the payload
``(data, sender, pi)``, a direction and a channel.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .model import (
    STAR,
    AgentDef,
    Message,
    SystemDef,
    format_assertion,
    solve,
)


@dataclass(frozen=True)
class TransLabel:
    data: tuple
    sender: str
    pi: object
    dir: str  # '!' or '?'
    ch: str

    @property
    def payload(self):
        return (self.data, self.sender, self.pi)

    def message(self) -> Message:
        return Message(self.ch, self.data, self.sender, self.pi)

    def __str__(self):
        d = ",".join(f"{k}={v}" for k, v in self.data)
        return f"{{{d}}},{self.sender},{format_assertion(self.pi)},{self.dir},{self.ch}"


class Cts:
    """Interface shared by agent and composed transition systems."""

    channels: tuple

    def initial_states(self) -> list:
        raise NotImplementedError

    def sends(self, s) -> list:
        """``[(TransLabel, s')]`` for every send transition from s."""
        raise NotImplementedError

    def receives(self, s, payload, ch) -> list:
        """Targets of receive transitions from s for the given payload and channel."""
        raise NotImplementedError

    def listening(self, s) -> frozenset:
        raise NotImplementedError

    def describe(self, s) -> str:
        return str(s)


class ExplicitCts(Cts):
    """A CTS given by explicit tables; used for generated test systems.

    ``trans`` is a list of ``(s, (payload, dir, ch), s')``; ``ls`` maps a state
    to its listened channels (the broadcast channel is always added).
    """

    def __init__(self, channels, states, initial, trans, ls):
        self.channels = tuple(channels)
        self.states = tuple(states)
        self._initial = list(initial)
        self._ls = {s: frozenset(ls.get(s, ())) | {STAR} for s in self.states}
        self._sends: dict = {s: [] for s in self.states}
        self._recv: dict = {}
        for s, (payload, d, ch), t in trans:
            data, sender, pi = payload
            if d == "!":
                self._sends[s].append((TransLabel(data, sender, pi, "!", ch), t))
            else:
                self._recv.setdefault((s, payload, ch), []).append(t)

    def initial_states(self):
        return list(self._initial)

    def sends(self, s):
        return self._sends.get(s, [])

    def receives(self, s, payload, ch):
        return self._recv.get((s, payload, ch), [])

    def listening(self, s):
        return self._ls[s]


class AgentCts(Cts):
    """The open CTS of one agent; states are tuples in variable order."""

    def __init__(self, agent: AgentDef, system: SystemDef):
        self.agent = agent
        self.system = system
        self.channels = system.channels
        self.cv_decls = tuple(system.common)
        self._sends: dict = {}
        self._recv: dict = {}
        self._ls: dict = {}
        self._pi: dict = {}
        self._next_slots = [(("n", v.name), v.domain.values) for v in agent.vars]

    def initial_states(self):
        a = self.agent
        return [s for s in a.states() if a.init.ev(a.state_env(s))]

    def listening(self, s):
        hit = self._ls.get(s)
        if hit is None:
            env = self.agent.state_env(s)
            hit = frozenset(c for c in self.channels
                            if self.agent.recv_guard.ev({**env, ("ch",): c}))
            self._ls[s] = hit
        return hit

    def sends(self, s):
        hit = self._sends.get(s)
        if hit is None:
            hit = []
            a = self.agent
            env = a.state_env(s)
            data_slots = [(("d", d.name), d.domain.values) for d in self.system.data]
            for ch in self.channels:
                cenv = {**env, ("ch",): ch}
                rel = a.send_rel.pe(cenv)
                for sol in solve(rel, {}, data_slots + self._next_slots):
                    data = tuple((d.name, v) for d, v in zip(self.system.data, sol))
                    nxt = tuple(sol[len(data_slots):])
                    pi = a.send_guard.pe({**cenv, **{("d", k): v for k, v in data}}, self.cv_decls)
                    hit.append((TransLabel(data, a.name, pi, "!", ch), nxt))
            self._sends[s] = hit
        return hit

    def pi_holds(self, pi, s) -> bool:
        key = (pi, s)
        hit = self._pi.get(key)
        if hit is None:
            hit = pi.ev(self.agent.relabeled_cv(s, self.cv_decls), self.cv_decls)
            self._pi[key] = hit
        return hit

    def receives(self, s, payload, ch):
        data, sender, pi = payload
        if sender == self.agent.name or ch not in self.listening(s):
            return []
        if not self.pi_holds(pi, s):
            return []
        key = (s, data, ch)
        hit = self._recv.get(key)
        if hit is None:
            env = self.agent.state_env(s)
            env[("ch",)] = ch
            env.update((("d", k), v) for k, v in data)
            hit = solve(self.agent.recv_rel, env, self._next_slots)
            self._recv[key] = hit
        return hit

    def describe(self, s):
        return ",".join(f"{n}={v}" for n, v in zip(self.agent.var_names, s))


class ComposedCts(Cts):
    """Parallel composition of two CTSs.

    The ``rules`` switch removes individual rule groups; it exists only so
    tests can build deliberately broken compositions.
    """

    RULES = ("send-recv", "send-discard", "recv-recv", "recv-discard", "star")

    def __init__(self, left: Cts, right: Cts, rules=RULES):
        self.left = left
        self.right = right
        self.channels = tuple(dict.fromkeys(left.channels + right.channels))
        self.rules = frozenset(rules)
        self._sends: dict = {}
        self._recv: dict = {}

    def initial_states(self):
        return [(a, b) for a in self.left.initial_states() for b in self.right.initial_states()]

    def listening(self, s):
        return self.left.listening(s[0]) | self.right.listening(s[1])

    def sends(self, s):
        hit = self._sends.get(s)
        if hit is not None:
            return hit
        s1, s2 = s
        out = []
        seen = set()

        def add(label, t):
            if (label, t) not in seen:
                seen.add((label, t))
                out.append((label, t))

        for label, t1 in self.left.sends(s1):
            self._one_side_send(label, t1, s2, self.right, lambda a, b: (a, b), add)
        for label, t2 in self.right.sends(s2):
            self._one_side_send(label, t2, s1, self.left, lambda a, b: (b, a), add)
        self._sends[s] = out
        return out

    def _one_side_send(self, label, t_own, s_other, other, pair, add):
        ch, payload = label.ch, label.payload
        recv = other.receives(s_other, payload, ch)
        if "send-recv" in self.rules:
            for t in recv:
                add(label, pair(t_own, t))
        if "send-discard" in self.rules and ch not in other.listening(s_other):
            add(label, pair(t_own, s_other))
        if "star" in self.rules and ch == STAR and not recv:
            add(label, pair(t_own, s_other))

    def receives(self, s, payload, ch):
        key = (s, payload, ch)
        hit = self._recv.get(key)
        if hit is not None:
            return hit
        s1, s2 = s
        r1 = self.left.receives(s1, payload, ch)
        r2 = self.right.receives(s2, payload, ch)
        out = []
        if "recv-recv" in self.rules:
            out.extend((a, b) for a in r1 for b in r2)
        if "recv-discard" in self.rules:
            if ch not in self.right.listening(s2):
                out.extend((a, s2) for a in r1)
            if ch not in self.left.listening(s1):
                out.extend((s1, b) for b in r2)
        if "star" in self.rules and ch == STAR:
            if not r2:
                out.extend((a, s2) for a in r1)
            if not r1:
                out.extend((s1, b) for b in r2)
        out = list(dict.fromkeys(out))
        self._recv[key] = out
        return out

    def describe(self, s):
        return f"({self.left.describe(s[0])} | {self.right.describe(s[1])})"


def agent_to_cts(agent: AgentDef, system: SystemDef) -> AgentCts:
    return AgentCts(agent, system)


def compose(t1: Cts, t2: Cts, rules=ComposedCts.RULES) -> ComposedCts:
    return ComposedCts(t1, t2, rules)


def compose_all(parts, rules=ComposedCts.RULES) -> Cts:
    """Left fold of :func:`compose` over ``parts``."""
    parts = list(parts)
    acc = parts[0]
    for p in parts[1:]:
        acc = compose(acc, p, rules)
    return acc


def system_cts(system: SystemDef, rules=ComposedCts.RULES) -> Cts:
    return compose_all([AgentCts(a, system) for a in system.agents], rules)


def flatten(s, n: int) -> tuple:
    """Turn a left-nested pair state ``((s1, s2), s3)`` into ``(s1, s2, s3)``."""
    out = []
    for _ in range(n - 1):
        s, last = s
        out.append(last)
    out.append(s)
    return tuple(reversed(out))


def nest(s: tuple):
    acc = s[0]
    for x in s[1:]:
        acc = (acc, x)
    return acc


class ClosedSendGraph:
    """Send-only view of a closed composition; labels read as messages."""

    def __init__(self, cts: Cts, n_agents: Optional[int] = None):
        self.cts = cts
        self.n = n_agents

    def _flat(self, s):
        return flatten(s, self.n) if self.n else s

    def initial_states(self):
        return [self._flat(s) for s in self.cts.initial_states()]

    def successors(self, s):
        nested = nest(s) if self.n else s
        return [(label.message(), self._flat(t)) for label, t in self.cts.sends(nested)]


def closed_send_graph(cts: Cts, n_agents: Optional[int] = None) -> ClosedSendGraph:
    return ClosedSendGraph(cts, n_agents)


def reachable(initial: Iterable, successors: Callable, max_states: Optional[int] = None):
    """BFS from ``initial``; returns (states in visit order, transition count).

    ``successors(s)`` yields ``(label, s')`` pairs.
    """
    order = []
    seen = set()
    queue = deque()
    for s in initial:
        if s not in seen:
            seen.add(s)
            order.append(s)
            queue.append(s)
    n_trans = 0
    while queue:
        s = queue.popleft()
        for _, t in successors(s):
            n_trans += 1
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
                if max_states is not None and len(order) > max_states:
                    raise StateLimitExceeded(max_states)
    return order, n_trans


class StateLimitExceeded(Exception):
    def __init__(self, limit):
        self.limit = limit
        super().__init__(f"state limit of {limit} exceeded")


def cts_reachable(cts: Cts, max_states=None):
    """Reachable states of a CTS following send transitions (closed system)."""
    return reachable(cts.initial_states(), cts.sends, max_states)


def to_dot(cts: Cts, max_states=None, name="cts") -> str:
    """DOT rendering of the reachable send graph of ``cts``."""
    states, _ = cts_reachable(cts, max_states)
    index = {s: i for i, s in enumerate(states)}
    init = set(cts.initial_states())
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for s in states:
        shape = "doublecircle" if s in init else "circle"
        label = cts.describe(s).replace('"', '\\"')
        lines.append(f'  s{index[s]} [shape={shape}, label="{label}"];')
    for s in states:
        for label, t in cts.sends(s):
            text = str(label).replace('"', '\\"')
            lines.append(f'  s{index[s]} -> s{index[t]} [label="{text}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
