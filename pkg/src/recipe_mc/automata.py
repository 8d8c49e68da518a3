"""Formula to alternating automaton, dealternation, emptiness, model checking.

The alternating automaton has one state per subformula.  Its transition
function is available in two forms that are tested against each other:

* :meth:`Abw.delta` follows the inductive rules literally for a concrete
  state valuation and observation letter, returning a positive Boolean
  formula over automaton states;
* :meth:`Abw.delta_dnf` is the symbolic version used for construction: a
  list of ``(Guard, successors)`` terms whose disjunction is the image.

Dealternation is the subset-pair construction, where a pair ``(S, O)`` is
accepting when the owing set ``O`` is empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import ltol as L
from .model import Message, SystemDef


# ---------------------------------------------------------------------------
# Positive Boolean formulas over automaton states


B_TRUE = ("true",)
B_FALSE = ("false",)


def b_state(q):
    return ("state", q)


def b_and(a, b):
    if a == B_FALSE or b == B_FALSE:
        return B_FALSE
    if a == B_TRUE:
        return b
    if b == B_TRUE:
        return a
    return ("and", a, b)


def b_or(a, b):
    if a == B_TRUE or b == B_TRUE:
        return B_TRUE
    if a == B_FALSE:
        return b
    if b == B_FALSE:
        return a
    return ("or", a, b)


def b_satisfied(b, states) -> bool:
    """Does the set ``states`` satisfy the positive formula ``b``?"""
    tag = b[0]
    if tag == "true":
        return True
    if tag == "false":
        return False
    if tag == "state":
        return b[1] in states
    if tag == "and":
        return b_satisfied(b[1], states) and b_satisfied(b[2], states)
    return b_satisfied(b[1], states) or b_satisfied(b[2], states)


def b_dnf(b) -> set:
    """Minimal satisfying sets of ``b``."""
    tag = b[0]
    if tag == "true":
        out = {frozenset()}
    elif tag == "false":
        out = set()
    elif tag == "state":
        out = {frozenset([b[1]])}
    elif tag == "and":
        out = {x | y for x in b_dnf(b[1]) for y in b_dnf(b[2])}
    else:
        out = b_dnf(b[1]) | b_dnf(b[2])
    return {x for x in out if not any(y < x for y in out)}


# ---------------------------------------------------------------------------
# Guards


@dataclass(frozen=True)
class Guard:
    """Conjunction of state literals and observation-letter literals."""

    pos: frozenset = frozenset()  # {(var, value)}
    neg: frozenset = frozenset()
    obs_in: frozenset = frozenset()  # indices into the observation tuple
    obs_out: frozenset = frozenset()

    def holds(self, valuation: dict, letter: frozenset) -> bool:
        return (all(valuation.get(v) == x for v, x in self.pos)
                and not any(valuation.get(v) == x for v, x in self.neg)
                and self.obs_in <= letter and not (self.obs_out & letter))

    def sort_key(self):
        return (sorted(self.pos), sorted(self.neg), sorted(self.obs_in), sorted(self.obs_out))


TOP = Guard()


def merge_guards(a: Guard, b: Guard, domains: dict) -> Optional[Guard]:
    """Conjunction of two guards, or None when inconsistent."""
    pos = a.pos | b.pos
    neg = a.neg | b.neg
    obs_in = a.obs_in | b.obs_in
    obs_out = a.obs_out | b.obs_out
    if obs_in & obs_out:
        return None
    fixed = {}
    for v, x in pos:
        if fixed.setdefault(v, x) != x:
            return None
    if any(v in fixed and fixed[v] == x for v, x in neg):
        return None
    neg = frozenset((v, x) for v, x in neg if v not in fixed)
    excluded: dict = {}
    for v, x in neg:
        excluded.setdefault(v, set()).add(x)
    for v, xs in excluded.items():
        dom = domains.get(v)
        if dom is not None and set(dom) <= xs:
            return None
    return Guard(frozenset(pos), neg, obs_in, obs_out)


def guard_valuation(g: Guard, domains: dict) -> dict:
    """The first valuation (in domain order) satisfying the state part of g."""
    fixed = dict(g.pos)
    out = {}
    for v, dom in domains.items():
        if v in fixed:
            out[v] = fixed[v]
        else:
            out[v] = next(x for x in dom if (v, x) not in g.neg)
    return out


def system_domains(system: SystemDef) -> dict:
    return {f"{a.name}.{v.name}": v.domain.values for a in system.agents for v in a.vars}


# ---------------------------------------------------------------------------
# Alternating automaton


class Abw:
    def __init__(self, formula: L.Formula, system: SystemDef):
        self.formula = formula
        self.system = system
        self.states = L.subformulas(formula)
        self.initial = formula
        self.accepting = frozenset(q for q in self.states if isinstance(q, L.Release))
        self.observations = L.top_observations(formula)
        self.obs_index = {o: i for i, o in enumerate(self.observations)}
        self.domains = system_domains(system)
        self._dnf: dict = {}

    def delta(self, q: L.Formula, valuation: dict, letter) -> tuple:
        """Image of q on the state valuation and letter (a set of descriptors)."""
        if isinstance(q, L.FConst):
            return B_TRUE if q.value else B_FALSE
        if isinstance(q, L.Prop):
            inside = valuation.get(q.var) == q.value
            return B_TRUE if inside == q.positive else B_FALSE
        if isinstance(q, L.FOr):
            return b_or(self.delta(q.left, valuation, letter), self.delta(q.right, valuation, letter))
        if isinstance(q, L.FAnd):
            return b_and(self.delta(q.left, valuation, letter), self.delta(q.right, valuation, letter))
        if isinstance(q, L.Until):
            return b_or(b_and(self.delta(q.left, valuation, letter), b_state(q)),
                        self.delta(q.right, valuation, letter))
        if isinstance(q, L.Release):
            return b_and(b_or(self.delta(q.left, valuation, letter), b_state(q)),
                         self.delta(q.right, valuation, letter))
        if isinstance(q, L.Diamond):
            return b_state(q.body) if q.obs in letter else B_FALSE
        if isinstance(q, L.Box):
            return b_state(q.body) if q.obs in letter else B_TRUE
        raise TypeError(q)

    def _product(self, xs, ys):
        out = []
        for g1, s1 in xs:
            for g2, s2 in ys:
                g = merge_guards(g1, g2, self.domains)
                if g is not None:
                    out.append((g, s1 | s2))
        return out

    def delta_dnf(self, q: L.Formula) -> list:
        hit = self._dnf.get(q)
        if hit is not None:
            return hit
        if isinstance(q, L.FConst):
            out = [(TOP, frozenset())] if q.value else []
        elif isinstance(q, L.Prop):
            lit = frozenset([(q.var, q.value)])
            out = [(Guard(pos=lit), frozenset())] if q.positive else [(Guard(neg=lit), frozenset())]
        elif isinstance(q, L.FOr):
            out = self.delta_dnf(q.left) + self.delta_dnf(q.right)
        elif isinstance(q, L.FAnd):
            out = self._product(self.delta_dnf(q.left), self.delta_dnf(q.right))
        elif isinstance(q, L.Until):
            out = [(g, s | {q}) for g, s in self.delta_dnf(q.left)] + self.delta_dnf(q.right)
        elif isinstance(q, L.Release):
            out = self._product(self.delta_dnf(q.left) + [(TOP, frozenset([q]))], self.delta_dnf(q.right))
        elif isinstance(q, L.Diamond):
            i = self.obs_index[q.obs]
            out = [] if q.body == L.FALSE_F else [(Guard(obs_in=frozenset([i])), frozenset([q.body]))]
        elif isinstance(q, L.Box):
            i = self.obs_index[q.obs]
            out = [(Guard(obs_out=frozenset([i])), frozenset())]
            if q.body != L.FALSE_F:
                out.insert(0, (Guard(obs_in=frozenset([i])), frozenset([q.body])))
        else:
            raise TypeError(q)
        out = list(dict.fromkeys(out))
        self._dnf[q] = out
        return out

    def letter_descriptors(self, letter_idx) -> frozenset:
        return frozenset(self.observations[i] for i in letter_idx)


def formula_to_abw(f: L.Formula, system: SystemDef) -> Abw:
    return Abw(f, system)


# ---------------------------------------------------------------------------
# Nondeterministic automaton (subset pairs)


def _strip(states):
    return frozenset(q for q in states if q != L.TRUE_F)


class Nbw:
    """Büchi automaton with states ``(S, O)``; accepting iff O is empty."""

    def __init__(self, abw: Abw, max_states: Optional[int] = None):
        self.abw = abw
        self.observations = abw.observations
        self.domains = abw.domains
        self.initial = (_strip([abw.initial]), frozenset())
        self._edges: dict = {}
        self.max_states = max_states

    def accepting(self, state) -> bool:
        return not state[1]

    def edges(self, state) -> list:
        """[(Guard, state')] in a fixed order."""
        hit = self._edges.get(state)
        if hit is not None:
            return hit
        S, O = state
        abw = self.abw
        F = abw.accepting
        # partial products: guard -> set of (S', O')
        partial = {TOP: {(frozenset(), frozenset())}}
        for q in sorted(S, key=abw.states.index):
            terms = abw.delta_dnf(q)
            owing = q in O
            nxt: dict = {}
            for g, acc in partial.items():
                for tg, succ in terms:
                    m = merge_guards(g, tg, self.domains)
                    if m is None:
                        continue
                    bucket = nxt.setdefault(m, set())
                    for s_part, o_part in acc:
                        bucket.add((s_part | succ, o_part | succ if owing else o_part))
            partial = nxt
            if not partial:
                break
        out = []
        for g, targets in partial.items():
            for s_part, o_part in targets:
                s_new = _strip(s_part)
                if not O:
                    o_new = frozenset(q for q in s_new if q not in F)
                else:
                    o_new = frozenset(q for q in _strip(o_part) if q not in F)
                out.append((g, (s_new, o_new)))
        out = list(dict.fromkeys(out))
        out.sort(key=lambda e: (e[0].sort_key(), _state_key(abw, e[1])))
        self._edges[state] = out
        return out

    def explore(self, max_states=None):
        """All reachable states and edges (materializes the automaton)."""
        order = [self.initial]
        seen = {self.initial}
        i = 0
        while i < len(order):
            for _, t in self.edges(order[i]):
                if t not in seen:
                    seen.add(t)
                    order.append(t)
            i += 1
        return order


def _state_key(abw, st):
    idx = abw.states.index
    return (sorted(idx(q) for q in st[0]), sorted(idx(q) for q in st[1]))


def abw_to_nbw(abw: Abw) -> Nbw:
    return Nbw(abw)


def formula_to_nbw(f: L.Formula, system: SystemDef) -> Nbw:
    return Nbw(Abw(f, system))


# ---------------------------------------------------------------------------
# Emptiness


def nested_dfs(initials, successors, accepting):
    """Find an accepting lasso; returns (stem, loop) or None.

    ``successors(n)`` yields ``(label, n')``.  Stem and loop are lists of
    ``(node, label)``: the label is taken from node to the next position.
    Iterative two-colour search, deterministic for ordered successors.
    """
    visited = set()
    flagged = set()
    for init in initials:
        if init in visited:
            continue
        visited.add(init)
        stack = [(init, None, iter(successors(init)))]
        while stack:
            node, _, it = stack[-1]
            pushed = False
            for label, nxt in it:
                if nxt not in visited:
                    visited.add(nxt)
                    stack[-1] = (node, label, it)
                    stack.append((nxt, None, iter(successors(nxt))))
                    pushed = True
                    break
            if pushed:
                continue
            stack.pop()
            if accepting(node):
                cycle = _inner_dfs(node, successors, flagged)
                if cycle is not None:
                    stem = [(n, lbl) for n, lbl, _ in stack]
                    return stem, cycle
    return None


def _inner_dfs(seed, successors, flagged):
    stack = [(seed, None, iter(successors(seed)))]
    while stack:
        node, _, it = stack[-1]
        pushed = False
        for label, nxt in it:
            if nxt == seed:
                stack[-1] = (node, label, it)
                return [(n, lbl) for n, lbl, _ in stack]
            if nxt not in flagged:
                flagged.add(nxt)
                stack[-1] = (node, label, it)
                stack.append((nxt, None, iter(successors(nxt))))
                pushed = True
                break
        if not pushed:
            stack.pop()
    return None


# ---------------------------------------------------------------------------
# Verdicts


@dataclass
class Verdict:
    result: str  # holds | fails | sat | unsat
    stem: tuple = ()  # ((state_json, Message), ...)
    loop: tuple = ()
    lasso: Optional[L.Lasso] = None
    deadlock: Optional[dict] = None
    stats: dict = field(default_factory=dict)

    @property
    def has_witness(self):
        return bool(self.loop)

    def to_json(self) -> dict:
        out = {"result": self.result}
        if self.loop:
            out["witness"] = {
                "stem": [{"state": s, "message": m.to_json()} for s, m in self.stem],
                "loop": [{"state": s, "message": m.to_json()} for s, m in self.loop],
            }
        else:
            out["witness"] = None
        if self.deadlock is not None:
            out["deadlock"] = self.deadlock
        return out


def group_valuation(valuation: dict) -> dict:
    out: dict = {}
    for key, v in valuation.items():
        agent, var = key.split(".", 1)
        out.setdefault(agent, {})[var] = v
    return out


def satisfiable(f: L.Formula, system: SystemDef) -> Verdict:
    """Decide satisfiability over the vocabulary of ``system``.

    Edges are followed only when their letter part is realisable by some
    message; a sat verdict carries a lasso of valuations and witness messages.
    """
    nbw = formula_to_nbw(f, system)
    obs = nbw.observations
    letter_cache: dict = {}

    def witness(g: Guard):
        key = (g.obs_in, g.obs_out)
        if key not in letter_cache:
            letter_cache[key] = L.guard_satisfiable([obs[i] for i in sorted(g.obs_in)],
                                                    [obs[i] for i in sorted(g.obs_out)], system)
        return letter_cache[key]

    def succ(state):
        for g, t in nbw.edges(state):
            if witness(g) is not None:
                yield g, t

    found = nested_dfs([nbw.initial], succ, nbw.accepting)
    stats = {"letters_checked": len(letter_cache)}
    if found is None:
        return Verdict("unsat", stats=stats)
    stem, loop = found

    def positions(path):
        out = []
        for _, g in path:
            val = guard_valuation(g, nbw.domains)
            out.append((val, witness(g)))
        return tuple(out)

    s_pos, l_pos = positions(stem), positions(loop)
    lasso = L.Lasso(s_pos, l_pos)
    return Verdict("sat",
                   tuple((group_valuation(v), m) for v, m in s_pos),
                   tuple((group_valuation(v), m) for v, m in l_pos),
                   lasso, stats=stats)


def find_deadlock(sym, max_states=None):
    """First reachable state without successors (BFS order), or None."""
    from .cts import reachable

    dead = []

    def succ(s):
        out = sym.successors(s)
        if not out and not dead:
            dead.append(s)
        return out

    states, trans = reachable(sym.initial_states(), succ, max_states)
    return (dead[0] if dead else None), len(states), trans


def model_check(system: SystemDef, f: L.Formula, max_states: Optional[int] = None,
                sym=None) -> Verdict:
    """Does every computation of ``system`` satisfy ``f``?

    Searches the product of the system with the automaton for the dual of f;
    every system state counts as accepting.  A reachable state without
    successors is found first and recorded in ``Verdict.deadlock`` as a
    warning; only infinite computations are checked.
    """
    from .symbolic import SymbolicSystem

    sym = sym or SymbolicSystem(system)
    dead, n_states, n_trans = find_deadlock(sym, max_states)
    dead_json = None if dead is None else sym.state_json(dead)
    neg = L.dual(f)
    nbw = formula_to_nbw(neg, system)
    table = L.ObservationTable(nbw.observations, system.common)
    val_cache: dict = {}

    def valuation(s):
        v = val_cache.get(s)
        if v is None:
            v = sym.valuation(s)
            val_cache[s] = v
        return v

    def succ(node):
        s, q = node
        val = valuation(s)
        edges = nbw.edges(q)
        for m, t in sym.successors(s):
            letter = table.letter(m)
            for g, q2 in edges:
                if g.holds(val, letter):
                    yield m, (t, q2)

    initials = [(s, nbw.initial) for s in sym.initial_states()]
    product_nodes = set()

    def counted(node):
        product_nodes.add(node)
        return succ(node)

    found = nested_dfs(initials, counted, lambda n: nbw.accepting(n[1]))
    stats = {"states": n_states, "transitions": n_trans, "product_nodes": len(product_nodes)}
    if found is None:
        return Verdict("holds", deadlock=dead_json, stats=stats)
    stem, loop = found

    def positions(path):
        return tuple((node[0], m) for node, m in path)

    s_pos, l_pos = positions(stem), positions(loop)
    lasso = L.Lasso(tuple((valuation(s), m) for s, m in s_pos),
                    tuple((valuation(s), m) for s, m in l_pos))
    return Verdict("fails",
                   tuple((sym.state_json(s), m) for s, m in s_pos),
                   tuple((sym.state_json(s), m) for s, m in l_pos),
                   lasso, deadlock=dead_json, stats=stats)


def lasso_accepted(nbw: Nbw, lasso: L.Lasso, cv_decls) -> bool:
    """Does the automaton accept the ultimately periodic word ``lasso``?"""
    pos = lasso.positions
    table = L.ObservationTable(nbw.observations, cv_decls)
    letters = [table.letter(m) for _, m in pos]

    def succ(node):
        i, q = node
        val = pos[i][0]
        j = lasso.successor(i)
        for g, q2 in nbw.edges(q):
            if g.holds(val, letters[i]):
                yield g, (j, q2)

    return nested_dfs([(0, nbw.initial)], succ, lambda n: nbw.accepting(n[1])) is not None


def replay_counterexample(system: SystemDef, f: L.Formula, verdict: Verdict, sym=None) -> bool:
    """A 'fails' witness is a real system lasso on which f evaluates false."""
    from .symbolic import SymbolicSystem

    if verdict.result != "fails":
        return False
    sym = sym or SymbolicSystem(system)
    names = system.agent_names

    def tuple_state(js):
        return tuple(tuple(js[a][v] for v in system.agent(a).var_names) for a in names)

    path = list(verdict.stem) + list(verdict.loop)
    states = [tuple_state(s) for s, _ in path]
    if states[0] not in set(sym.initial_states()):
        return False
    loop_start = states[len(verdict.stem)]
    for i, (s, (_, m)) in enumerate(zip(states, path)):
        t = states[i + 1] if i + 1 < len(states) else loop_start
        if (m, t) not in set(sym.successors(s)):
            return False
    return not L.eval_formula(f, verdict.lasso, system.common)


def replay_sat_witness(f: L.Formula, verdict: Verdict, system: SystemDef) -> bool:
    return verdict.result == "sat" and L.eval_formula(f, verdict.lasso, system.common)


# ---------------------------------------------------------------------------
# DOT export


def _guard_text(g: Guard, observations) -> str:
    parts = [f"{v}={x}" for v, x in sorted(g.pos)]
    parts += [f"{v}!={x}" for v, x in sorted(g.neg)]
    letters = [L.format_descriptor(observations[i]) for i in sorted(g.obs_in)]
    letters += ["!(" + L.format_descriptor(observations[i]) + ")" for i in sorted(g.obs_out)]
    state = " & ".join(parts) if parts else "true"
    return f"{state} / {{{', '.join(letters)}}}"


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def abw_to_dot(abw: Abw) -> str:
    nodes = [q for q in abw.states if q != L.FALSE_F]
    idx = {q: i for i, q in enumerate(nodes)}
    lines = ["digraph abw {", "  rankdir=LR;"]
    for q in nodes:
        shape = "doublecircle" if q in abw.accepting else "circle"
        extra = ", style=bold" if q == abw.initial else ""
        lines.append(f'  q{idx[q]} [shape={shape}{extra}, label="{_esc(L.format_formula(q))}"];')
    for q in nodes:
        for t, (g, succ) in enumerate(abw.delta_dnf(q)):
            label = _esc(_guard_text(g, abw.observations))
            for r in sorted(succ, key=abw.states.index):
                lines.append(f'  q{idx[q]} -> q{idx[r]} [label="{label} #{t}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def nbw_to_dot(nbw: Nbw) -> str:
    states = nbw.explore()
    idx = {s: i for i, s in enumerate(states)}
    abw = nbw.abw

    def name(st):
        S = ", ".join(L.format_formula(q) for q in sorted(st[0], key=abw.states.index))
        O = ", ".join(L.format_formula(q) for q in sorted(st[1], key=abw.states.index))
        return f"S={{{S}}} O={{{O}}}"

    lines = ["digraph nbw {", "  rankdir=LR;"]
    for s in states:
        shape = "doublecircle" if nbw.accepting(s) else "circle"
        extra = ", style=bold" if s == nbw.initial else ""
        lines.append(f'  n{idx[s]} [shape={shape}{extra}, label="{_esc(name(s))}"];')
    for s in states:
        for g, t in nbw.edges(s):
            lines.append(f'  n{idx[s]} -> n{idx[t]} [label="{_esc(_guard_text(g, nbw.observations))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_automaton(a) -> str:
    return abw_to_dot(a) if isinstance(a, Abw) else nbw_to_dot(a)
