"""Brute-force reference procedures used to cross-check the main pipeline.

Nothing here shares a code path with the procedure it checks:

* :func:`brute_descriptor_satisfiable` enumerates explicit messages, with
  sender predicates given as bit sets of common-variable assignments, and
  evaluates descriptors with its own vectorized evaluator;
* :func:`product_holds_scc` builds the whole product graph explicitly and
  decides emptiness with strongly connected components instead of nested
  depth-first search.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from . import kernels
from . import ltol as L
from .model import SystemDef, iter_cv_assignments


# ---------------------------------------------------------------------------
# Letter satisfiability by enumeration


def _singleton(o, ch, data, sender, c) -> bool:
    if isinstance(o, L.DConst):
        return o.value
    if isinstance(o, L.ChanAtom):
        return (ch == o.ch) is o.positive
    if isinstance(o, L.DataAtom):
        return (data[o.name] == o.value) is o.positive
    if isinstance(o, L.SenderAtom):
        return (sender == o.agent) is o.positive
    if isinstance(o, L.CvAtom):
        return (c[o.name] == o.value) is o.positive
    if isinstance(o, L.DAnd):
        return _singleton(o.left, ch, data, sender, c) and _singleton(o.right, ch, data, sender, c)
    if isinstance(o, L.DOr):
        return _singleton(o.left, ch, data, sender, c) or _singleton(o.right, ch, data, sender, c)
    return _singleton(o.body, ch, data, sender, c)


def _quantified_nodes(o, out):
    """Message-level quantifier nodes (bare cv atoms count as quantified)."""
    if isinstance(o, (L.DAnd, L.DOr)):
        _quantified_nodes(o.left, out)
        _quantified_nodes(o.right, out)
    elif isinstance(o, (L.Exists, L.Forall, L.CvAtom)):
        if o not in out:
            out.append(o)
    return out


def existential_count(o) -> int:
    nodes = _quantified_nodes(o, [])
    return sum(1 for q in nodes if isinstance(q, L.Exists)
               or (isinstance(q, L.CvAtom) and not q.positive))


def _vector_eval(o, ch, data, sender, columns, n):
    if isinstance(o, L.DConst):
        return np.full(n, o.value)
    if isinstance(o, L.ChanAtom):
        return np.full(n, (ch == o.ch) is o.positive)
    if isinstance(o, L.DataAtom):
        return np.full(n, (data[o.name] == o.value) is o.positive)
    if isinstance(o, L.SenderAtom):
        return np.full(n, (sender == o.agent) is o.positive)
    if isinstance(o, L.DAnd):
        return _vector_eval(o.left, ch, data, sender, columns, n) & _vector_eval(o.right, ch, data, sender, columns, n)
    if isinstance(o, L.DOr):
        return _vector_eval(o.left, ch, data, sender, columns, n) | _vector_eval(o.right, ch, data, sender, columns, n)
    return columns[o]


def pi_subset_masks(n_assign: int, max_size: int) -> np.ndarray:
    masks = []
    for size in range(min(max_size, n_assign) + 1):
        for combo in itertools.combinations(range(n_assign), size):
            m = 0
            for j in combo:
                m |= 1 << j
            masks.append(m)
    return np.array(masks, dtype=np.uint64)


def brute_descriptor_satisfiable(o: L.Descriptor, system: SystemDef, max_size=None,
                                 pi_masks=None):
    """Search explicit messages for a model of ``o``.

    Sender predicates range over all sets of at most ``max_size``
    common-variable assignments (default: the number of existential atoms,
    which suffices because a descriptor is positive in its quantified atoms).
    Returns ``(ch, data, sender, assignments)`` or None.
    """
    cv_decls = tuple(system.common)
    names = [d.name for d in cv_decls]
    cvs = [dict(zip(names, t)) for t in iter_cv_assignments(cv_decls)]
    n_assign = len(cvs)
    if n_assign > 64:
        raise ValueError("brute force supports at most 64 common-variable assignments")
    if pi_masks is None:
        bound = existential_count(o) if max_size is None else max_size
        pi_masks = pi_subset_masks(n_assign, bound)
    nodes = _quantified_nodes(o, [])
    for ch in system.channels:
        for data in system.data_assignments():
            dd = dict(data)
            for sender in system.agent_names:
                atom_masks, kinds = [], []
                for q in nodes:
                    if isinstance(q, L.CvAtom):
                        body, ex = q, not q.positive
                    else:
                        body, ex = q.body, isinstance(q, L.Exists)
                    m = 0
                    for j, c in enumerate(cvs):
                        if _singleton(body, ch, dd, sender, c):
                            m |= 1 << j
                    atom_masks.append(m)
                    kinds.append(ex)
                if nodes:
                    table = kernels.quantifier_truth(pi_masks, atom_masks, kinds, n_assign)
                    columns = {q: table[:, i] for i, q in enumerate(nodes)}
                else:
                    columns = {}
                ok = _vector_eval(o, ch, dd, sender, columns, len(pi_masks))
                hits = np.flatnonzero(ok)
                if hits.size:
                    mask = int(pi_masks[hits[0]])
                    chosen = [cvs[j] for j in range(n_assign) if mask >> j & 1]
                    return ch, dd, sender, chosen
    return None


def brute_letter_satisfiable(letter, observations: Sequence[L.Descriptor], system: SystemDef,
                             max_size=None) -> bool:
    chosen = set(letter)
    parts = [o for o in observations if o in chosen]
    parts += [L.dual_descriptor(o) for o in observations if o not in chosen]
    return brute_descriptor_satisfiable(L.conjoin(parts), system, max_size) is not None


# ---------------------------------------------------------------------------
# Product emptiness by SCC analysis


def product_holds_scc(system: SystemDef, f: L.Formula, max_nodes=200000) -> bool:
    """Model checking by explicit product construction and SCC analysis."""
    from .automata import formula_to_nbw
    from .symbolic import SymbolicSystem

    sym = SymbolicSystem(system)
    nbw = formula_to_nbw(L.dual(f), system)
    table = L.ObservationTable(nbw.observations, system.common)
    index: dict = {}
    nodes: list = []
    edges: list = []

    def node_id(x):
        i = index.get(x)
        if i is None:
            i = len(nodes)
            index[x] = i
            nodes.append(x)
            if len(nodes) > max_nodes:
                raise RuntimeError("product too large for the SCC oracle")
        return i

    roots = [node_id((s, nbw.initial)) for s in sym.initial_states()]
    i = 0
    while i < len(nodes):
        s, q = nodes[i]
        val = sym.valuation(s)
        for m, t in sym.successors(s):
            letter = table.letter(m)
            for g, q2 in nbw.edges(q):
                if g.holds(val, letter):
                    edges.append((i, node_id((t, q2))))
        i += 1
    n = len(nodes)
    indptr, indices = kernels.to_csr(n, edges)
    reach = kernels.bfs_reach(indptr, indices, roots)
    comp = kernels.scc(indptr, indices)
    sizes = np.bincount(comp, minlength=comp.max() + 1 if n else 0)
    cyclic = np.zeros(len(sizes), dtype=bool)
    cyclic[sizes > 1] = True
    for u, v in edges:
        if u == v:
            cyclic[comp[u]] = True
    for k in range(n):
        if reach[k] and nbw.accepting(nodes[k][1]) and cyclic[comp[k]]:
            return False
    return True
