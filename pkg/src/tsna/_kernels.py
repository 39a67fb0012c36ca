"""Array-level BFS kernels shared by the shortest-path centralities.

Written against plain numpy arrays so the same code runs jitted (numba,
when available) or interpreted. Graphs arrive as CSR: ``indptr``/``indices``
for out-edges, ``rindptr``/``rindices`` for in-edges.
"""

from __future__ import annotations

import numpy as np


def _betweenness_impl(n, indptr, indices, rindptr, rindices, sources):
    # Brandes accumulation over the given source set, directed and unweighted.
    bc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    for si in range(len(sources)):
        s = sources[si]
        for i in range(n):
            dist[i] = -1
        sigma[s] = 1.0
        dist[s] = 0
        order[0] = s
        head = 0
        count = 1
        while head < count:
            v = order[head]
            head += 1
            dv = dist[v]
            for ei in range(indptr[v], indptr[v + 1]):
                w = indices[ei]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    sigma[w] = 0.0
                    order[count] = w
                    count += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        for i in range(count - 1, 0, -1):
            delta[order[i]] = 0.0
        delta[s] = 0.0
        for i in range(count - 1, 0, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w]
            for ei in range(rindptr[w], rindptr[w + 1]):
                v = rindices[ei]
                if dist[v] == dw - 1:
                    delta[v] += sigma[v] * coeff
            bc[w] += delta[w]
    return bc


def _distance_sums_impl(n, indptr, indices):
    # Per-source total forward distance; unreachable targets count as n.
    totals = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
        dist[s] = 0
        order[0] = s
        head = 0
        count = 1
        total = 0.0
        while head < count:
            v = order[head]
            head += 1
            dv = dist[v]
            total += dv
            for ei in range(indptr[v], indptr[v + 1]):
                w = indices[ei]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[count] = w
                    count += 1
        totals[s] = total + (n - count) * n
    return totals


try:  # pragma: no cover - exercised indirectly
    from numba import njit

    betweenness_kernel = njit(cache=True)(_betweenness_impl)
    distance_sums_kernel = njit(cache=True)(_distance_sums_impl)
except ImportError:  # pragma: no cover
    betweenness_kernel = _betweenness_impl
    distance_sums_kernel = _distance_sums_impl
