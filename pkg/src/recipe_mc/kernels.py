"""Array kernels for graph search and quantifier evaluation.

Each kernel has a numba-compiled version and a pure numpy/Python fallback.
Set ``RECIPE_MC_NUMBA=0`` to force the fallback (numba is also skipped when
it is not importable).  Both paths return identical results.
"""

from __future__ import annotations

import os

import numpy as np

try:  # numba is optional at runtime
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False


def numba_enabled() -> bool:
    return _HAVE_NUMBA and os.environ.get("RECIPE_MC_NUMBA", "1") != "0"


# ---------------------------------------------------------------------------
# Plain-loop implementations (compiled by numba when enabled)


def _bfs_loop(indptr, indices, sources):
    n = indptr.shape[0] - 1
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for s in sources:
        if not seen[s]:
            seen[s] = True
            queue[tail] = s
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if not seen[v]:
                seen[v] = True
                queue[tail] = v
                tail += 1
    return seen


def _scc_loop(indptr, indices):
    """Iterative Tarjan; returns a component id per node."""
    n = indptr.shape[0] - 1
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    onstack = np.zeros(n, dtype=np.bool_)
    comp = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    sp = 0
    call_node = np.empty(n, dtype=np.int64)
    call_edge = np.empty(n, dtype=np.int64)
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        depth = 0
        call_node[0] = root
        call_edge[0] = indptr[root]
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        onstack[root] = True
        while depth >= 0:
            u = call_node[depth]
            e = call_edge[depth]
            if e < indptr[u + 1]:
                call_edge[depth] = e + 1
                v = indices[e]
                if index[v] == -1:
                    index[v] = counter
                    low[v] = counter
                    counter += 1
                    stack[sp] = v
                    sp += 1
                    onstack[v] = True
                    depth += 1
                    call_node[depth] = v
                    call_edge[depth] = indptr[v]
                elif onstack[v]:
                    if index[v] < low[u]:
                        low[u] = index[v]
            else:
                if low[u] == index[u]:
                    while True:
                        sp -= 1
                        w = stack[sp]
                        onstack[w] = False
                        comp[w] = ncomp
                        if w == u:
                            break
                    ncomp += 1
                depth -= 1
                if depth >= 0:
                    p = call_node[depth]
                    if low[u] < low[p]:
                        low[p] = low[u]
    return comp


def _quantifier_loop(pi_masks, atom_masks, is_exists, full):
    out = np.zeros((pi_masks.shape[0], atom_masks.shape[0]), dtype=np.bool_)
    for i in range(pi_masks.shape[0]):
        p = pi_masks[i]
        for j in range(atom_masks.shape[0]):
            if is_exists[j]:
                out[i, j] = (p & atom_masks[j]) != 0
            else:
                out[i, j] = (p & (full & ~atom_masks[j])) == 0
    return out


if _HAVE_NUMBA:
    _bfs_jit = numba.njit(cache=False)(_bfs_loop)
    _scc_jit = numba.njit(cache=False)(_scc_loop)
    _quantifier_jit = numba.njit(cache=False)(_quantifier_loop)


# ---------------------------------------------------------------------------
# numpy fallbacks


def _bfs_numpy(indptr, indices, sources):
    n = indptr.shape[0] - 1
    seen = np.zeros(n, dtype=bool)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    seen[frontier] = True
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
        nbrs = indices[offsets + np.arange(total)]
        nbrs = np.unique(nbrs)
        nbrs = nbrs[~seen[nbrs]]
        seen[nbrs] = True
        frontier = nbrs
    return seen


def _quantifier_numpy(pi_masks, atom_masks, is_exists, full):
    p = pi_masks[:, None]
    a = atom_masks[None, :]
    ex = (p & a) != 0
    fa = (p & (full & ~a)) == 0
    return np.where(is_exists[None, :], ex, fa)


# ---------------------------------------------------------------------------
# Public entry points


def to_csr(n: int, edges):
    """CSR arrays for ``n`` nodes and an iterable of ``(u, v)`` edges."""
    edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]
    counts = np.bincount(edges[:, 0], minlength=n) if len(edges) else np.zeros(n, dtype=np.int64)
    indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    return indptr, edges[:, 1].copy()


def bfs_reach(indptr, indices, sources) -> np.ndarray:
    sources = np.asarray(sources, dtype=np.int64)
    if numba_enabled():
        return _bfs_jit(indptr, indices, sources)
    return _bfs_numpy(indptr, indices, sources)


def scc(indptr, indices) -> np.ndarray:
    if numba_enabled():
        return _scc_jit(indptr, indices)
    return _scc_loop(indptr, indices)


def quantifier_truth(pi_masks, atom_masks, is_exists, n_bits: int) -> np.ndarray:
    """Truth of quantified atoms over many sender predicates at once.

    ``pi_masks[i]`` and ``atom_masks[j]`` are bit sets over the ``n_bits``
    common-variable assignments.  Entry ``[i, j]`` is whether the predicate i
    has some assignment in atom j (existential) or only such assignments
    (universal).
    """
    pi_masks = np.asarray(pi_masks, dtype=np.uint64)
    atom_masks = np.asarray(atom_masks, dtype=np.uint64)
    is_exists = np.asarray(is_exists, dtype=np.bool_)
    full = np.uint64((1 << n_bits) - 1) if n_bits < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    if numba_enabled():
        return _quantifier_jit(pi_masks, atom_masks, is_exists, full)
    return _quantifier_numpy(pi_masks, atom_masks, is_exists, full)
