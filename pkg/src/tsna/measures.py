"""Centrality suite and the per-entity measure matrix.

Eight measures: in/out degree, barycenter, betweenness, HITS hubness and
authoritativeness, PageRank, and a mean-first-passage-time random-walk
centrality. Raw vectors are scaled onto the 0-10 band scale via percentile
rank so role bands act as population quantiles.

Conventions in force throughout:
  - shortest paths are unweighted and directed (weights are interaction
    counts, not distances)
  - degrees count distinct neighbors
  - random walks (PageRank, the MFPT centrality) move with probability
    proportional to edge weight
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ._kernels import betweenness_kernel, distance_sums_kernel
from .graph import EntityId, Snapshot


class MeasureId(str, enum.Enum):
    DEGREE_IN = "degree_in"
    DEGREE_OUT = "degree_out"
    BARY_CENTER = "bary_center"
    BETWEENNESS = "betweenness"
    HUBNESS = "hubness"
    AUTHORITATIVENESS = "authoritativeness"
    PAGE_RANK = "page_rank"
    MARKOV = "markov_centrality"


ALL_MEASURES: tuple[MeasureId, ...] = tuple(MeasureId)


@dataclass(frozen=True)
class SolverParams:
    """Settings for the iterative solvers.

    ``damping`` applies to PageRank only. Betweenness switches from exact
    Brandes accumulation to pivot sampling above ``betweenness_exact_limit``
    nodes unless ``betweenness_exact`` forces the exact path.
    """

    damping: float = 0.85
    tolerance: float = 1e-10
    max_iterations: int = 10_000
    betweenness_exact_limit: int = 20_000
    betweenness_pivots: int = 512
    betweenness_exact: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.damping < 1.0:
            raise ValueError(f"damping must be in (0,1), got {self.damping}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")


DEFAULT_PARAMS = SolverParams()


@dataclass
class MeasureMatrix:
    """Per-entity raw and band-scaled values for the computed measures."""

    entities: tuple[EntityId, ...]
    raw: dict[MeasureId, np.ndarray] = field(default_factory=dict)
    scaled: dict[MeasureId, np.ndarray] = field(default_factory=dict)
    converged: dict[MeasureId, bool] = field(default_factory=dict)

    def scaled_row(self, entity: EntityId) -> dict[MeasureId, float]:
        i = self.entities.index(entity)
        return {m: float(vec[i]) for m, vec in self.scaled.items()}

    def raw_row(self, entity: EntityId) -> dict[MeasureId, float]:
        i = self.entities.index(entity)
        return {m: float(vec[i]) for m, vec in self.raw.items()}


def _edge_arrays(snap: Snapshot) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct edges as (src_idx, dst_idx, weight), sorted by (src, dst)."""
    idx = snap.index
    m = len(snap.edges)
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    wgt = np.empty(m, dtype=np.float64)
    for i, ((s, d), w) in enumerate(snap.edges.items()):
        src[i] = idx[s]
        dst[i] = idx[d]
        wgt[i] = w
    order = np.lexsort((dst, src))
    return src[order], dst[order], wgt[order]


def _csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.astype(np.int64)


def degree_in(snap: Snapshot) -> np.ndarray:
    """Number of distinct in-neighbors per node."""
    out = np.zeros(snap.n_nodes, dtype=np.float64)
    idx = snap.index
    for _, d in snap.edges:
        out[idx[d]] += 1
    return out


def degree_out(snap: Snapshot) -> np.ndarray:
    """Number of distinct out-neighbors per node."""
    out = np.zeros(snap.n_nodes, dtype=np.float64)
    idx = snap.index
    for s, _ in snap.edges:
        out[idx[s]] += 1
    return out


def betweenness(
    snap: Snapshot,
    params: SolverParams = DEFAULT_PARAMS,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Directed unweighted shortest-path betweenness, unnormalized.

    Exact Brandes accumulation up to ``betweenness_exact_limit`` nodes;
    larger graphs fall back to pivot sampling (contributions from a random
    source subset, rescaled by n / pivots) unless forced exact.
    """
    n = snap.n_nodes
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    src, dst, _ = _edge_arrays(snap)
    indptr, indices = _csr(n, src, dst)
    rorder = np.lexsort((src, dst))
    rindptr, rindices = _csr(n, dst[rorder], src[rorder])

    exact = params.betweenness_exact or n <= params.betweenness_exact_limit
    if exact:
        sources = np.arange(n, dtype=np.int64)
        scale = 1.0
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        k = min(params.betweenness_pivots, n)
        sources = np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)
        scale = n / k
    bc = betweenness_kernel(n, indptr, indices, rindptr, rindices, sources)
    return bc * scale


def barycenter(snap: Snapshot) -> np.ndarray:
    """Inverse total forward distance; unreachable nodes count distance n.

    A node that reaches nothing in a graph of n > 1 nodes scores
    1/(n*(n-1)); a single-node graph scores 0.
    """
    n = snap.n_nodes
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    src, dst, _ = _edge_arrays(snap)
    indptr, indices = _csr(n, src, dst)
    totals = distance_sums_kernel(n, indptr, indices)
    out = np.zeros(n, dtype=np.float64)
    nz = totals > 0
    out[nz] = 1.0 / totals[nz]
    return out


@dataclass
class HitsResult:
    hubness: np.ndarray
    authoritativeness: np.ndarray
    converged: bool
    iterations: int


def _l2_normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    return vec / norm if norm > 0 else vec


def hits(snap: Snapshot, params: SolverParams = DEFAULT_PARAMS) -> HitsResult:
    """Mutual-reinforcement hub/authority scores on distinct edges.

    Each iteration: a <- normalize(A^T h), h <- normalize(A a), with
    Euclidean normalization, until the max-abs change of both vectors drops
    below tolerance. The returned authority vector is recomputed from the
    final hub vector so the pair is self-consistent.
    """
    n = snap.n_nodes
    if n == 0 or snap.n_edges == 0:
        zero = np.zeros(n, dtype=np.float64)
        return HitsResult(zero, zero.copy(), True, 0)
    src, dst, _ = _edge_arrays(snap)
    h = np.full(n, 1.0 / np.sqrt(n))
    a = np.zeros(n)
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        a_next = _l2_normalize(np.bincount(dst, weights=h[src], minlength=n))
        h_next = _l2_normalize(np.bincount(src, weights=a_next[dst], minlength=n))
        change = max(
            float(np.max(np.abs(a_next - a))), float(np.max(np.abs(h_next - h)))
        )
        a, h = a_next, h_next
        if change < params.tolerance:
            converged = True
            break
    a = _l2_normalize(np.bincount(dst, weights=h[src], minlength=n))
    return HitsResult(h, a, converged, iterations)


@dataclass
class PageRankResult:
    values: np.ndarray
    converged: bool
    iterations: int


def pagerank(snap: Snapshot, params: SolverParams = DEFAULT_PARAMS) -> PageRankResult:
    """Power iteration with damping; dangling mass spread uniformly.

    Transitions are proportional to edge weight. The result sums to 1;
    convergence is an L1 change below tolerance.
    """
    n = snap.n_nodes
    if n == 0:
        return PageRankResult(np.zeros(0), True, 0)
    src, dst, wgt = _edge_arrays(snap)
    out_weight = np.bincount(src, weights=wgt, minlength=n)
    dangling = out_weight == 0
    norm_w = wgt / out_weight[src]
    d = params.damping
    p = np.full(n, 1.0 / n)
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        acc = np.bincount(dst, weights=p[src] * norm_w, minlength=n)
        mass = float(p[dangling].sum())
        p_next = d * (acc + mass / n) + (1.0 - d) / n
        change = float(np.abs(p_next - p).sum())
        p = p_next
        if change < params.tolerance:
            converged = True
            break
    return PageRankResult(p, converged, iterations)


def _strongly_connected_components(
    n: int, indptr: np.ndarray, indices: np.ndarray
) -> list[list[int]]:
    """Iterative Tarjan SCC on the CSR digraph."""
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, indptr[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, ei = work[-1]
            if ei < indptr[v + 1]:
                work[-1] = (v, ei + 1)
                w = int(indices[ei])
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, indptr[w]))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    components.append(comp)
    return components


def markov_centrality(snap: Snapshot) -> np.ndarray:
    """Inverse mean first-passage time of the weight-proportional walk.

    Only the largest strongly connected component carries the chain; for a
    node v in that component C the score is |C| divided by the total MFPT
    into v from every u in C (with mfpt(v, v) = 0). Everything outside C
    scores 0, as does everything when |C| < 2.

    Cost is one dense |C| x |C| factorization, so memory grows with the
    square of the component size.
    """
    n = snap.n_nodes
    out = np.zeros(n, dtype=np.float64)
    if n == 0 or snap.n_edges == 0:
        return out
    src, dst, wgt = _edge_arrays(snap)
    indptr, indices = _csr(n, src, dst)
    components = _strongly_connected_components(n, indptr, indices)
    comp = max(components, key=lambda c: (len(c), -min(c)))
    if len(comp) < 2:
        return out
    comp = sorted(comp)
    k = len(comp)
    sub = np.full(n, -1, dtype=np.int64)
    sub[comp] = np.arange(k)
    mask = (sub[src] >= 0) & (sub[dst] >= 0)
    p = np.zeros((k, k), dtype=np.float64)
    p[sub[src[mask]], sub[dst[mask]]] = wgt[mask]
    p /= p.sum(axis=1, keepdims=True)

    # stationary distribution: pi (P - I) = 0 with sum(pi) = 1
    a = p.T - np.eye(k)
    a[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)

    # fundamental matrix; mfpt(u, v) = (Z[v,v] - Z[u,v]) / pi[v]
    z = np.linalg.inv(np.eye(k) - p + np.outer(np.ones(k), pi))
    colsum = z.sum(axis=0)
    out[np.asarray(comp)] = k * pi / (k * np.diag(z) - colsum)
    return out


def scale_to_bands(raw: Sequence[float] | np.ndarray) -> np.ndarray:
    """Map raw values onto [0, 10) by mean-fractional percentile rank.

    Ties share their mean rank, so equal raw values scale identically and
    any strictly increasing re-parameterization of the raw measure leaves
    the output unchanged. A constant vector maps to all 5.0.
    """
    values = np.asarray(raw, dtype=np.float64)
    n = values.size
    if n == 0:
        raise ValueError("cannot scale an empty vector")
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    boundaries = np.empty(n, dtype=bool)
    boundaries[0] = True
    boundaries[1:] = sorted_vals[1:] != sorted_vals[:-1]
    group_start = np.flatnonzero(boundaries)
    group_end = np.append(group_start[1:], n)
    mean_rank = (group_start + 1 + group_end) / 2.0
    ranks_sorted = np.repeat(mean_rank, group_end - group_start)
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = ranks_sorted
    return 10.0 * (ranks - 0.5) / n


def measure_matrix(
    snap: Snapshot,
    measures: Iterable[MeasureId] = ALL_MEASURES,
    params: SolverParams = DEFAULT_PARAMS,
    rng: Optional[np.random.Generator] = None,
) -> MeasureMatrix:
    """Compute the requested measures and their band-scaled versions.

    Solver non-convergence is recorded per measure and never aborts the
    matrix.
    """
    requested = list(dict.fromkeys(measures))
    matrix = MeasureMatrix(entities=snap.nodes)
    hits_result: Optional[HitsResult] = None
    for measure in requested:
        ok = True
        if measure is MeasureId.DEGREE_IN:
            vec = degree_in(snap)
        elif measure is MeasureId.DEGREE_OUT:
            vec = degree_out(snap)
        elif measure is MeasureId.BARY_CENTER:
            vec = barycenter(snap)
        elif measure is MeasureId.BETWEENNESS:
            vec = betweenness(snap, params, rng)
        elif measure in (MeasureId.HUBNESS, MeasureId.AUTHORITATIVENESS):
            if hits_result is None:
                hits_result = hits(snap, params)
            ok = hits_result.converged
            vec = (
                hits_result.hubness
                if measure is MeasureId.HUBNESS
                else hits_result.authoritativeness
            )
        elif measure is MeasureId.PAGE_RANK:
            result = pagerank(snap, params)
            ok = result.converged
            vec = result.values
        elif measure is MeasureId.MARKOV:
            vec = markov_centrality(snap)
        else:  # pragma: no cover
            raise ValueError(f"unknown measure {measure}")
        matrix.raw[measure] = vec
        matrix.scaled[measure] = scale_to_bands(vec) if snap.n_nodes else vec
        matrix.converged[measure] = ok
    return matrix


def matrix_to_csv(matrix: MeasureMatrix, path: str) -> None:
    """Write rows ``entity,measure,raw,scaled``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["entity", "measure", "raw", "scaled"])
        for measure in matrix.raw:
            raw = matrix.raw[measure]
            scaled = matrix.scaled[measure]
            for i, entity in enumerate(matrix.entities):
                writer.writerow(
                    [entity, measure.value, repr(float(raw[i])), repr(float(scaled[i]))]
                )


def matrix_report(matrix: MeasureMatrix) -> dict:
    """JSON-able summary with per-measure convergence flags."""
    return {
        "entities": len(matrix.entities),
        "measures": [m.value for m in matrix.raw],
        "converged": {m.value: bool(v) for m, v in matrix.converged.items()},
    }


def matrix_from_csv(path: str) -> MeasureMatrix:
    """Rebuild a MeasureMatrix from the ``entity,measure,raw,scaled`` CSV."""
    per_measure: dict[MeasureId, dict[EntityId, tuple[float, float]]] = {}
    entities: list[EntityId] = []
    seen: set[EntityId] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            entity = row["entity"]
            measure = MeasureId(row["measure"])
            if entity not in seen:
                seen.add(entity)
                entities.append(entity)
            per_measure.setdefault(measure, {})[entity] = (
                float(row["raw"]),
                float(row["scaled"]),
            )
    matrix = MeasureMatrix(entities=tuple(entities))
    for measure, values in per_measure.items():
        matrix.raw[measure] = np.array([values[e][0] for e in entities])
        matrix.scaled[measure] = np.array([values[e][1] for e in entities])
        matrix.converged[measure] = True
    return matrix


def matrix_report_to_json(matrix: MeasureMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_report(matrix), fh, indent=2, sort_keys=True)
        fh.write("\n")
