"""The interpreted kernel fallbacks must match the jitted kernels exactly."""

import numpy as np
from hypothesis import given, settings, strategies as st

from tsna._kernels import (
    _betweenness_impl,
    _distance_sums_impl,
    betweenness_kernel,
    distance_sums_kernel,
)
from tsna.measures import _csr, _edge_arrays

from conftest import snap_from_edges
from oracles import random_digraph


def build_csr(seed, n, p_edge=0.3):
    rng = np.random.default_rng(seed)
    nodes, edges = random_digraph(rng, n, p_edge=p_edge)
    snap = snap_from_edges(edges, extra_nodes=nodes)
    src, dst, _ = _edge_arrays(snap)
    indptr, indices = _csr(snap.n_nodes, src, dst)
    rorder = np.lexsort((src, dst))
    rindptr, rindices = _csr(snap.n_nodes, dst[rorder], src[rorder])
    return snap.n_nodes, indptr, indices, rindptr, rindices


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12))
def test_betweenness_fallback_matches_jitted(seed, n):
    n_nodes, indptr, indices, rindptr, rindices = build_csr(seed, n)
    sources = np.arange(n_nodes, dtype=np.int64)
    jitted = betweenness_kernel(n_nodes, indptr, indices, rindptr, rindices, sources)
    plain = _betweenness_impl(n_nodes, indptr, indices, rindptr, rindices, sources)
    assert np.allclose(jitted, plain, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 12))
def test_distance_sums_fallback_matches_jitted(seed, n):
    n_nodes, indptr, indices, _, _ = build_csr(seed, n)
    jitted = distance_sums_kernel(n_nodes, indptr, indices)
    plain = _distance_sums_impl(n_nodes, indptr, indices)
    assert np.array_equal(jitted, plain)
