"""Discrete-system semantics: the global relation evaluated from assertions.

A system state is a tuple of local states, one per agent in declaration
order.  :func:`successors` evaluates the global transition relation directly:
the sender's send relation, and for every other agent exactly one of

  (a) it listens on the channel, satisfies the sender predicate through its
      renaming, and takes a receive step;
  (b) it does not listen on the channel and keeps its state;
  (c) the channel is the broadcast one, it does not satisfy the sender
      predicate, and keeps its state.

It does not use the CTS module; the two meet only in
:func:`full_abstraction_check`.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .model import (
    STAR,
    AgentDef,
    Message,
    SystemDef,
    assignment_tuples,
    solve,
)


class DeadEnd(Exception):
    """No successor exists from ``state`` (a maximality violation)."""

    def __init__(self, state, step):
        self.state = state
        self.step = step
        super().__init__(f"no successor at step {step}")


class _AgentTables:
    def __init__(self, agent: AgentDef, system: SystemDef):
        self.agent = agent
        self.system = system
        self.cv_decls = tuple(system.common)
        self.next_slots = [(("n", v.name), v.domain.values) for v in agent.vars]
        self.send_slots = [(("ch",), system.channels)] + [
            (("d", d.name), d.domain.values) for d in system.data] + self.next_slots
        self.sends: dict = {}
        self.recvs: dict = {}
        self.guard: dict = {}
        self.pi: dict = {}

    def send_options(self, s):
        """[(ch, data, pi, s')] ordered by channel, data, then next state."""
        hit = self.sends.get(s)
        if hit is None:
            a = self.agent
            env = a.state_env(s)
            nd = len(self.system.data)
            hit = []
            order = {c: i for i, c in enumerate(self.system.channels)}
            for sol in solve(a.send_rel, env, self.send_slots):
                ch = sol[0]
                data = tuple((d.name, v) for d, v in zip(self.system.data, sol[1:1 + nd]))
                nxt = tuple(sol[1 + nd:])
                genv = dict(env)
                genv[("ch",)] = ch
                genv.update((("d", k), v) for k, v in data)
                pi = a.send_guard.pe(genv, self.cv_decls)
                hit.append((ch, data, pi, nxt))
            hit.sort(key=lambda x: order[x[0]])  # stable: keeps data/next order
            self.sends[s] = hit
        return hit

    def listens(self, s, ch) -> bool:
        key = (s, ch)
        hit = self.guard.get(key)
        if hit is None:
            env = self.agent.state_env(s)
            env[("ch",)] = ch
            hit = self.agent.recv_guard.ev(env)
            self.guard[key] = hit
        return hit

    def satisfies(self, pi, s) -> bool:
        key = (pi, s)
        hit = self.pi.get(key)
        if hit is None:
            # read the common variables through this agent's renaming
            hit = pi.ev(self.agent.relabeled_cv(s, self.cv_decls), self.cv_decls)
            self.pi[key] = hit
        return hit

    def receive_targets(self, s, ch, data):
        key = (s, ch, data)
        hit = self.recvs.get(key)
        if hit is None:
            env = self.agent.state_env(s)
            env[("ch",)] = ch
            env.update((("d", k), v) for k, v in data)
            hit = solve(self.agent.recv_rel, env, self.next_slots)
            self.recvs[key] = hit
        return hit


class SymbolicSystem:
    """Memoizing evaluator of the global relation for one system."""

    def __init__(self, system: SystemDef):
        self.system = system
        self.tables = [_AgentTables(a, system) for a in system.agents]
        self._succ: dict = {}

    def initial_states(self) -> list:
        per_agent = []
        for a in self.system.agents:
            per_agent.append([s for s in assignment_tuples(a.vars) if a.init.ev(a.state_env(s))])
        return [tuple(c) for c in itertools.product(*per_agent)]

    def successors(self, state: tuple) -> list:
        """[(Message, state')] in sender, channel, data, next-state order."""
        hit = self._succ.get(state)
        if hit is None:
            hit = self._successors(state)
            self._succ[state] = hit
        return hit

    def _successors(self, state: tuple) -> list:
        out = []
        for k, tk in enumerate(self.tables):
            sender = tk.agent.name
            for ch, data, pi, nxt in tk.send_options(state[k]):
                choices = []
                blocked = False
                for j, tj in enumerate(self.tables):
                    if j == k:
                        choices.append([nxt])
                        continue
                    sj = state[j]
                    listens = tj.listens(sj, ch)
                    sat = tj.satisfies(pi, sj)
                    opts = []
                    if listens and sat:  # (a)
                        opts.extend(tj.receive_targets(sj, ch, data))
                    if not listens:  # (b)
                        opts.append(sj)
                    if ch == STAR and not sat:  # (c)
                        opts.append(sj)
                    opts = list(dict.fromkeys(opts))
                    if not opts:
                        blocked = True
                        break
                    choices.append(opts)
                if blocked:
                    continue
                msg = Message(ch, data, sender, pi)
                for combo in itertools.product(*choices):
                    out.append((msg, tuple(combo)))
        return list(dict.fromkeys(out))

    def state_json(self, state: tuple) -> dict:
        return {a.name: dict(zip(a.var_names, s)) for a, s in zip(self.system.agents, state)}

    def valuation(self, state: tuple) -> dict:
        """Flat ``agent.var -> value`` view used by formulas."""
        out = {}
        for a, s in zip(self.system.agents, state):
            for n, v in zip(a.var_names, s):
                out[f"{a.name}.{n}"] = v
        return out


def initial_states(system: SystemDef) -> list:
    return SymbolicSystem(system).initial_states()


def successors(system: SystemDef, state: tuple) -> list:
    return SymbolicSystem(system).successors(state)


# ---------------------------------------------------------------------------
# Traces


@dataclass(frozen=True)
class TraceStep:
    state: tuple
    message: Message


def trace_stream(sym: SymbolicSystem, s0: tuple, n: int, seed: int = 0,
                 policy: Optional[Callable] = None) -> list:
    """A length-n trace prefix from ``s0``.

    The default policy picks uniformly among successors with a private
    ``random.Random(seed)``; successors are listed in a fixed order, so the
    trace depends only on the inputs.
    """
    rng = random.Random(seed)
    if policy is None:
        policy = lambda succ, step: succ[rng.randrange(len(succ))]
    steps = []
    s = s0
    for i in range(n):
        succ = sym.successors(s)
        if not succ:
            raise DeadEnd(s, i)
        msg, t = policy(succ, i)
        steps.append(TraceStep(s, msg))
        s = t
    return steps


def step_json(sym: SymbolicSystem, step: TraceStep) -> dict:
    return {"state": sym.state_json(step.state), "message": step.message.to_json()}


def trace_json(sym: SymbolicSystem, steps) -> list:
    return [step_json(sym, st) for st in steps]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


# ---------------------------------------------------------------------------
# Full abstraction


@dataclass
class EquivalenceReport:
    equivalent: bool
    states_checked: int = 0
    transitions: int = 0
    initial: int = 0
    divergence: Optional[dict] = None
    scope: str = "reachable"

    def to_json(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "scope": self.scope,
            "states": self.states_checked,
            "transitions": self.transitions,
            "initial": self.initial,
            "divergence": self.divergence,
        }


def full_abstraction_check(system: SystemDef, compose_fn=None, exhaustive=None,
                           max_states=None) -> EquivalenceReport:
    """Compare the global relation with the composed CTS send graph.

    Checks that the initial states coincide and that, state by state, the
    labelled successor sets are equal.  With ``exhaustive`` every product
    state is compared; otherwise the states reachable under either semantics
    (default when the product exceeds 20000 states).  ``compose_fn`` builds
    the CTS; tests swap in broken compositions.
    """
    from .cts import AgentCts, ComposedCts, compose_all, flatten, nest

    sym = SymbolicSystem(system)
    n = len(system.agents)
    if compose_fn is None:
        compose_fn = lambda parts: compose_all(parts)
    cts = compose_fn([AgentCts(a, system) for a in system.agents])

    def cts_succ(s):
        nested = nest(s)
        return [(lbl.message(), flatten(t, n)) for lbl, t in cts.sends(nested)]

    space = 1
    for a in system.agents:
        for v in a.vars:
            space *= len(v.domain)
    if exhaustive is None:
        exhaustive = space <= 20000

    sym_init = set(sym.initial_states())
    cts_init = {flatten(s, n) for s in cts.initial_states()}
    report = EquivalenceReport(True, initial=len(sym_init),
                               scope="exhaustive" if exhaustive else "reachable")
    if exhaustive:
        all_states = list(itertools.product(*[list(assignment_tuples(a.vars)) for a in system.agents]))
        for s in all_states:
            if (s in sym_init) != (s in cts_init):
                report.equivalent = False
                report.divergence = {"kind": "initial", "state": sym.state_json(s),
                                     "symbolic": s in sym_init, "cts": s in cts_init}
                return report
        frontier = all_states
    else:
        if sym_init != cts_init:
            s = sorted(sym_init ^ cts_init)[0]
            report.equivalent = False
            report.divergence = {"kind": "initial", "state": sym.state_json(s),
                                 "symbolic": s in sym_init, "cts": s in cts_init}
            return report
        frontier = None

    seen = set()
    order = list(frontier) if frontier is not None else sorted(sym_init)
    seen.update(order)
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        a = sym.successors(s)
        b = cts_succ(s)
        sa, sb = set(a), set(b)
        report.states_checked += 1
        report.transitions += len(sa)
        if sa != sb:
            only_sym = sorted(sa - sb, key=lambda x: (x[0].sort_key(), x[1]))
            only_cts = sorted(sb - sa, key=lambda x: (x[0].sort_key(), x[1]))
            report.equivalent = False
            report.divergence = {
                "kind": "transition",
                "state": sym.state_json(s),
                "only_symbolic": [{"message": m.to_json(), "target": sym.state_json(t)} for m, t in only_sym[:3]],
                "only_cts": [{"message": m.to_json(), "target": sym.state_json(t)} for m, t in only_cts[:3]],
            }
            return report
        if frontier is None:
            for _, t in a:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
                    if max_states is not None and len(order) > max_states:
                        from .cts import StateLimitExceeded
                        raise StateLimitExceeded(max_states)
    return report
