"""Checkers for algebraic laws of CTS composition.

Each checker returns a list of violations (empty when the law holds).  They
only use the public ``Cts`` interface, so they apply to explicit and agent
transition systems alike.
"""

from __future__ import annotations

from recipe_mc.model import STAR


def explore_open(cts, payloads, limit=5000):
    """States reachable through sends and receives of the given payloads."""
    order = list(dict.fromkeys(cts.initial_states()))
    seen = set(order)
    i = 0
    while i < len(order) and len(order) < limit:
        s = order[i]
        i += 1
        targets = [t for _, t in cts.sends(s)]
        for p in payloads:
            for ch in cts.channels:
                targets.extend(cts.receives(s, p, ch))
        for t in targets:
            if t not in seen:
                seen.add(t)
                order.append(t)
    return order


def isomorphism_violations(c1, c2, iso, payloads):
    """Check that ``iso`` maps the transitions of c1 onto those of c2."""
    out = []
    if sorted(map(repr, map(iso, c1.initial_states()))) != sorted(map(repr, c2.initial_states())):
        out.append(("initial", None))
    for s in explore_open(c1, payloads):
        t = iso(s)
        if c1.listening(s) != c2.listening(t):
            out.append(("listening", s))
        a = {(lbl, iso(x)) for lbl, x in c1.sends(s)}
        b = set(c2.sends(t))
        if a != b:
            out.append(("sends", s))
        for p in payloads:
            for ch in c1.channels:
                if {iso(x) for x in c1.receives(s, p, ch)} != set(c2.receives(t, p, ch)):
                    out.append(("receives", s, p, ch))
    return out


def swap(s):
    return (s[1], s[0])


def reassociate(s):
    (a, b), c = s
    return (a, (b, c))


def broadcast_violations(comp, payloads):
    """A component's send on * is never blocked by its partner."""
    out = []
    for s in explore_open(comp, payloads):
        s1, s2 = s
        sends = comp.sends(s)
        for side, own, other_state in ((0, comp.left, s2), (1, comp.right, s1)):
            for lbl, t in own.sends(s[side]):
                if lbl.ch != STAR:
                    continue
                if not any(l2 == lbl and t2[side] == t for l2, t2 in sends):
                    out.append(("blocked broadcast", s, lbl))
        for p in payloads:
            r1 = comp.left.receives(s1, p, STAR)
            r2 = comp.right.receives(s2, p, STAR)
            joint = comp.receives(s, p, STAR)
            if bool(joint) != bool(r1 or r2):
                out.append(("broadcast receive", s, p))
    return out


def multicast_violations(comp, payloads):
    """A send on a named channel needs every listening partner to receive."""
    out = []
    for s in explore_open(comp, payloads):
        s1, s2 = s
        sends = set(comp.sends(s))
        for side, own, other, so in ((0, comp.left, comp.right, s2), (1, comp.right, comp.left, s1)):
            for lbl, t in own.sends(s[side]):
                if lbl.ch == STAR:
                    continue
                if lbl.ch in other.listening(so):
                    partners = other.receives(so, lbl.payload, lbl.ch)
                else:
                    partners = [so]
                expected = {(lbl, (t, x) if side == 0 else (x, t)) for x in partners}
                got = {(l2, t2) for l2, t2 in sends if l2 == lbl and t2[side] == t}
                if expected != got:
                    out.append(("multicast", s, lbl))
    return out
