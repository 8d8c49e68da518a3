"""Shared generators for randomised tests.

Random systems are produced as source text so every instance also exercises
the parser.  All generators take a ``random.Random`` and are deterministic.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from pathlib import Path

from recipe_mc import ltol as L
from recipe_mc.cts import ExplicitCts
from recipe_mc.model import FALSE, TRUE, Message, characteristic, iter_cv_assignments
from recipe_mc.parser import load_system, parse_system

CORPUS = Path(__file__).resolve().parents[1] / "src" / "recipe_mc" / "corpus"
RMS = CORPUS / "rms"
FIXTURES = CORPUS / "fixtures"


def rms_path(name: str) -> Path:
    return RMS / name


def load_rms(name: str = "rms", validate=True):
    return load_system(RMS / f"{name}.recipe", validate=validate)


# ---------------------------------------------------------------------------
# Random systems


def _lit(rng, vars_):
    name, dom = rng.choice(vars_)
    if dom == "bool":
        return name if rng.random() < 0.5 else f"!{name}"
    op = rng.choice(["=", "!="])
    return f"{name} {op} {rng.choice(dom)}"


def _assign(rng, vars_):
    parts = []
    for name, dom in vars_:
        r = rng.random()
        if r < 0.45:
            parts.append(f"keep({name})")
        elif r < 0.9:
            if dom == "bool":
                parts.append(f"{name}'" if rng.random() < 0.5 else f"!{name}'")
            else:
                parts.append(f"{name}' = {rng.choice(dom)}")
        # otherwise left free
    return parts


def _send_guard(rng, locals_):
    atoms = ["ch = *", "ch = c", "d(m) = 0", "d(m) = 1", "@f", "!@f", "@g = a", "@g = b",
             "@g = y", "x", "!x", "true"]
    k = rng.randint(1, 3)
    terms = []
    for _ in range(rng.randint(1, 2)):
        terms.append(" & ".join(rng.sample(atoms, k)))
    return " | ".join(f"({t})" for t in terms)


def random_system_text(rng: random.Random, n_agents=None, name="rand") -> str:
    """A valid system with 2 or 3 agents and at most 3 small variables each."""
    n = n_agents or rng.choice([2, 3])
    lines = [f"system {name} {{", "  channels *, c;", "  common f : bool, g : {a, b};",
             "  data m : {0, 1};"]
    for i in range(n):
        vars_ = [("x", "bool"), ("y", ("a", "b"))]
        if rng.random() < 0.5:
            vars_.append(("z", ("0", "1", "2")))
        decl = ", ".join(f"{v} : {'bool' if d == 'bool' else '{' + ', '.join(d) + '}'}" for v, d in vars_)
        init = " & ".join(_lit(rng, vars_) for _ in range(rng.randint(0, 2))) or "true"
        sends = []
        for _ in range(rng.randint(1, 3)):
            ch = rng.choice(["*", "*", "c"])
            parts = [_lit(rng, vars_) for _ in range(rng.randint(0, 1))]
            parts.append(f"ch = {ch}")
            if rng.random() < 0.8:
                parts.append(f"d(m) = {rng.choice('01')}")
            parts += _assign(rng, vars_)
            sends.append(" & ".join(parts))
        recvs = []
        for _ in range(rng.randint(0, 2)):
            ch = rng.choice(["*", "c"])
            parts = [f"ch = {ch}"] + [_lit(rng, vars_) for _ in range(rng.randint(0, 1))]
            if rng.random() < 0.5:
                parts.append(f"d(m) = {rng.choice('01')}")
            parts += _assign(rng, vars_)
            recvs.append(" & ".join(parts))
        if rng.random() < 0.5:
            recvs.append("ch = * & keep(all)")
        else:
            cond = _lit(rng, vars_)
            recvs.append(f"ch = * & !({cond}) & keep(all)")
            recvs.append(f"ch = * & {cond} & " + " & ".join(
                f"{v}' = {rng.choice(d)}" if d != "bool" else rng.choice([f"{v}'", f"!{v}'"])
                for v, d in vars_))
        listen = _lit(rng, vars_)
        lines += [
            f"  agent a{i} {{",
            f"    var {decl};",
            "    relabel f -> x, g -> y;",
            f"    init {init};",
            f"    send-guard {_send_guard(rng, vars_)};",
            f"    recv-guard ch = * | ch = c & {listen};",
            "    send {",
            *[f"      case {s};" for s in sends],
            "    }",
            "    recv {",
            *[f"      case {r};" for r in recvs],
            "    }",
            "  }",
        ]
    lines.append("}")
    return "\n".join(lines) + "\n"


def random_system(seed: int, n_agents=None):
    rng = random.Random(seed)
    return parse_system(random_system_text(rng, n_agents), filename=f"<random {seed}>")


# ---------------------------------------------------------------------------
# Random explicit transition systems


EXPLICIT_SENDERS = ("a", "b", "c")
EXPLICIT_DATA = ((("m", "0"),), (("m", "1"),))


def payload_universe(senders=EXPLICIT_SENDERS, datas=EXPLICIT_DATA):
    return [(d, k, TRUE) for k in senders for d in datas]


def random_explicit_cts(rng: random.Random, name: str, channels=("*", "c"), n_states=3,
                        senders=EXPLICIT_SENDERS) -> ExplicitCts:
    """Small explicit CTS sending as ``name`` and receiving from the others.

    States are ``(name, i)`` so compositions of different systems never
    confuse them.
    """
    states = [(name, i) for i in range(n_states)]
    incoming = [p for p in payload_universe(senders) if p[1] != name]
    trans = []
    ls = {}
    for s in states:
        ls[s] = [c for c in channels if c != "*" and rng.random() < 0.5]
        for _ in range(rng.randint(0, 3)):
            ch = rng.choice(channels)
            data = rng.choice(EXPLICIT_DATA)
            trans.append((s, ((data, name, TRUE), "!", ch), rng.choice(states)))
        for ch in channels:
            if ch != "*" and ch not in ls[s]:
                continue
            for p in incoming:
                for _ in range(rng.choice([0, 0, 1, 2])):
                    trans.append((s, (p, "?", ch), rng.choice(states)))
    initial = rng.sample(states, rng.randint(1, 2))
    return ExplicitCts(channels, states, initial, trans, ls)


# ---------------------------------------------------------------------------
# Random formulas and lassos over a small vocabulary

VOCAB_TEXT = """
system vocab {
  channels *, c;
  common f : bool, g : bool;
  data m : {0, 1};
  agent a {
    var p : bool, q : bool;
    relabel f -> p, g -> q;
    recv-guard ch = *;
    recv { case keep(all); }
  }
  agent b {
    var p : bool, q : bool;
    relabel f -> p, g -> q;
    recv-guard ch = *;
    recv { case keep(all); }
  }
}
"""


def vocab_system():
    return parse_system(VOCAB_TEXT, filename="<vocab>")


PROPS = ("a.p", "a.q")


@dataclass(frozen=True)
class Vocabulary:
    """Names random formulas may mention."""

    props: tuple  # ((var, value), ...)
    senders: tuple
    channels: tuple
    data: tuple  # ((name, value), ...)
    cv: tuple  # ((name, value), ...)


VOCAB = Vocabulary(
    props=tuple((p, "true") for p in PROPS),
    senders=("a", "b"),
    channels=("*", "c"),
    data=(("m", "0"), ("m", "1")),
    cv=(("f", "true"), ("f", "false"), ("g", "true"), ("g", "false")),
)

# vocabulary of the systems built by random_system
RANDOM_SYSTEM_VOCAB = Vocabulary(
    props=(("a0.x", "true"), ("a0.y", "a"), ("a1.x", "true"), ("a1.y", "b")),
    senders=("a0", "a1"),
    channels=("*", "c"),
    data=(("m", "0"), ("m", "1")),
    cv=(("f", "true"), ("f", "false"), ("g", "a"), ("g", "b")),
)


def random_descriptor(rng: random.Random, depth=2, vocab=VOCAB) -> L.Descriptor:
    def cv_atom():
        name, value = rng.choice(vocab.cv)
        return L.CvAtom(name, value, rng.random() < 0.6)

    leaves = [
        lambda: L.ChanAtom(rng.choice(vocab.channels), rng.random() < 0.7),
        lambda: L.DataAtom(*rng.choice(vocab.data), rng.random() < 0.7),
        lambda: L.SenderAtom(rng.choice(vocab.senders), rng.random() < 0.7),
        cv_atom,
    ]

    def cv_body(d):
        if d == 0 or rng.random() < 0.5:
            return cv_atom()
        return rng.choice([L.DAnd, L.DOr])(cv_body(d - 1), cv_body(d - 1))

    def go(d):
        r = rng.random()
        if d == 0 or r < 0.35:
            return rng.choice(leaves)()
        if r < 0.55:
            return rng.choice([L.Exists, L.Forall])(cv_body(d - 1))
        return rng.choice([L.DAnd, L.DOr])(go(d - 1), go(d - 1))

    return L.normalize_descriptor(go(depth))


def random_formula(rng: random.Random, max_subformulas=8, vocab=VOCAB) -> L.Formula:
    """A random formula with at most ``max_subformulas`` distinct subformulas."""
    while True:
        f = _formula(rng, rng.randint(2, 5), vocab)
        n = len(L.subformulas(f))
        if n <= max_subformulas and (n >= 3 or rng.random() < 0.2):
            return f


def _formula(rng, depth, vocab):
    r = rng.random()
    if depth == 0 or r < 0.25:
        if rng.random() < 0.15:
            return L.FConst(rng.random() < 0.5)
        var, value = rng.choice(vocab.props)
        return L.Prop(var, value, rng.random() < 0.6)
    kind = rng.choice(["and", "or", "U", "R", "dia", "box", "dia", "box"])
    if kind in ("dia", "box"):
        body = _formula(rng, depth - 1, vocab)
        cls = L.Diamond if kind == "dia" else L.Box
        return cls(random_descriptor(rng, 1, vocab), body)
    cls = {"and": L.FAnd, "or": L.FOr, "U": L.Until, "R": L.Release}[kind]
    return cls(_formula(rng, depth - 1, vocab), _formula(rng, depth - 1, vocab))


def random_message(rng: random.Random, cv_decls, senders=("a", "b"), channels=("*", "c")) -> Message:
    assignments = list(iter_cv_assignments(tuple(cv_decls)))
    chosen = [c for c in assignments if rng.random() < 0.5]
    pi = characteristic(chosen, tuple(cv_decls)) if chosen else FALSE
    if len(chosen) == len(assignments) and rng.random() < 0.5:
        pi = TRUE
    return Message(rng.choice(channels), (("m", rng.choice("01")),), rng.choice(senders), pi)


def random_lasso(rng: random.Random, cv_decls, props=PROPS) -> L.Lasso:
    def pos():
        val = {v: rng.choice(["true", "false"]) for v in props}
        return val, random_message(rng, cv_decls)

    stem = tuple(pos() for _ in range(rng.randint(0, 3)))
    loop = tuple(pos() for _ in range(rng.randint(1, 3)))
    return L.Lasso(stem, loop)


def all_letters(observations):
    n = len(observations)
    for r in range(n + 1):
        for combo in itertools.combinations(range(n), r):
            yield frozenset(observations[i] for i in combo)
