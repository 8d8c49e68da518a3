"""Graph and quantifier kernels: compiled and fallback paths agree."""

import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from recipe_mc import kernels


def random_edges(seed, n, density=0.15):
    rng = random.Random(seed)
    return [(u, v) for u in range(n) for v in range(n) if rng.random() < density]


def naive_reach(n, edges, sources):
    adj = {u: [] for u in range(n)}
    for u, v in edges:
        adj[u].append(v)
    seen = set(sources)
    stack = list(sources)
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


@pytest.fixture(params=["1", "0"], ids=["numba", "numpy"])
def backend(request, monkeypatch):
    monkeypatch.setenv("RECIPE_MC_NUMBA", request.param)
    return request.param


def test_env_flag_selects_the_path(monkeypatch):
    monkeypatch.setenv("RECIPE_MC_NUMBA", "0")
    assert not kernels.numba_enabled()
    monkeypatch.setenv("RECIPE_MC_NUMBA", "1")
    assert kernels.numba_enabled() == kernels._HAVE_NUMBA


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 40))
def test_bfs_matches_naive_search(seed, n):
    edges = random_edges(seed, n)
    indptr, indices = kernels.to_csr(n, edges)
    expected = naive_reach(n, edges, [0])
    for flag in ("1", "0"):
        with pytest.MonkeyPatch.context() as mp:
            mp.setenv("RECIPE_MC_NUMBA", flag)
            got = kernels.bfs_reach(indptr, indices, [0])
        assert set(np.flatnonzero(got)) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 30))
def test_scc_matches_mutual_reachability(seed, n):
    edges = random_edges(seed, n, 0.1)
    indptr, indices = kernels.to_csr(n, edges)
    reach = [naive_reach(n, edges, [u]) for u in range(n)]
    results = []
    for flag in ("1", "0"):
        with pytest.MonkeyPatch.context() as mp:
            mp.setenv("RECIPE_MC_NUMBA", flag)
            results.append(kernels.scc(indptr, indices))
    assert np.array_equal(results[0], results[1])
    comp = results[0]
    for u in range(n):
        for v in range(n):
            assert (comp[u] == comp[v]) == (v in reach[u] and u in reach[v])


def test_quantifier_truth(backend):
    n_bits = 5
    rng = random.Random(1)
    pis = [rng.randrange(1 << n_bits) for _ in range(50)] + [0, (1 << n_bits) - 1]
    atoms = [rng.randrange(1 << n_bits) for _ in range(6)]
    kinds = [i % 2 == 0 for i in range(6)]
    table = kernels.quantifier_truth(pis, atoms, kinds, n_bits)
    for i, p in enumerate(pis):
        members = [j for j in range(n_bits) if p >> j & 1]
        for k, (a, ex) in enumerate(zip(atoms, kinds)):
            inside = [bool(a >> j & 1) for j in members]
            assert table[i, k] == (any(inside) if ex else all(inside))


def test_quantifier_truth_at_64_bits(backend):
    full = (1 << 64) - 1
    table = kernels.quantifier_truth([full, 0], [full, 1], [False, True], 64)
    assert table.tolist() == [[True, True], [True, False]]


def test_csr_of_empty_graph(backend):
    indptr, indices = kernels.to_csr(3, [])
    assert indptr.tolist() == [0, 0, 0, 0]
    assert kernels.bfs_reach(indptr, indices, [1]).tolist() == [False, True, False]
    assert len(set(kernels.scc(indptr, indices).tolist())) == 3
