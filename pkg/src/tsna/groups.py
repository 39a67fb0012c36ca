"""Group extraction, fuzzy membership, tiering, and cross-window matching.

Groups are seeded by structure in the symmetrized interaction graph
(connected components above a weight threshold, or k-cores). Membership
strength is the fraction of an entity's symmetrized interaction weight that
lands inside the group core; tiers discretize that strength. Stability
between windows is the Jaccard index of kernel sets.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Set

from .graph import EntityId, Snapshot
from .measures import MeasureId, MeasureMatrix


class Tier(enum.IntEnum):
    NOT_RELATED = 0
    WEAK = 1
    CIRCUMJACENT = 2
    KERNEL = 3


@dataclass(frozen=True)
class TierThresholds:
    """Lower bounds on membership strength for each tier."""

    weak: float = 0.10
    circumjacent: float = 0.25
    kernel: float = 0.50

    def __post_init__(self) -> None:
        if not 0.0 < self.weak < self.circumjacent < self.kernel <= 1.0:
            raise ValueError(
                "tier thresholds must satisfy 0 < weak < circumjacent < kernel <= 1, "
                f"got {self.weak}/{self.circumjacent}/{self.kernel}"
            )


def classify_membership(f: float, thresholds: TierThresholds = TierThresholds()) -> Tier:
    """Map a membership strength to its tier (boundaries inclusive upward)."""
    if f >= thresholds.kernel:
        return Tier.KERNEL
    if f >= thresholds.circumjacent:
        return Tier.CIRCUMJACENT
    if f >= thresholds.weak:
        return Tier.WEAK
    return Tier.NOT_RELATED


@dataclass
class GroupStrategy:
    """Why the group hangs together: kernel measure profile and themes."""

    measure_summary: dict[MeasureId, float] = field(default_factory=dict)
    theme_tags: tuple[str, ...] = ()


@dataclass
class Group:
    id: str
    core: frozenset[EntityId]
    membership: dict[EntityId, float]
    tiers: dict[EntityId, Tier]
    strategy: GroupStrategy = field(default_factory=GroupStrategy)

    def kernel(self) -> set[EntityId]:
        return {e for e, t in self.tiers.items() if t is Tier.KERNEL}

    def members(self, min_tier: Tier = Tier.WEAK) -> set[EntityId]:
        return {e for e, t in self.tiers.items() if t >= min_tier}


class GroupMethod(enum.Enum):
    THRESHOLD_COMPONENTS = "threshold_components"
    K_CORE_SEEDS = "k_core_seeds"


@dataclass(frozen=True)
class GroupParams:
    method: GroupMethod = GroupMethod.THRESHOLD_COMPONENTS
    weight_threshold: float = 1.0
    k: int = 2
    tiers: TierThresholds = TierThresholds()

    def __post_init__(self) -> None:
        if self.weight_threshold < 1:
            raise ValueError(f"weight threshold must be >= 1, got {self.weight_threshold}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")


def _components(adj: Mapping[EntityId, Set[EntityId]]) -> list[list[EntityId]]:
    seen: set[EntityId] = set()
    components: list[list[EntityId]] = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        components.append(sorted(comp))
    return components


def _threshold_cores(snap: Snapshot, tau: float) -> list[list[EntityId]]:
    adj: dict[EntityId, set[EntityId]] = {}
    for v, nbrs in snap.sym_adj.items():
        kept = {u for u, w in nbrs.items() if w >= tau}
        if kept:
            adj[v] = kept
    comps = _components(adj)
    return [c for c in comps if len(c) >= 3]


def _kcore_cores(snap: Snapshot, k: int) -> list[list[EntityId]]:
    degrees = {v: len(nbrs) for v, nbrs in snap.sym_adj.items()}
    alive = {v for v, d in degrees.items() if d > 0}
    queue = [v for v in alive if degrees[v] < k]
    while queue:
        v = queue.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for u in snap.sym_adj[v]:
            if u in alive:
                degrees[u] -= 1
                if degrees[u] < k:
                    queue.append(u)
    adj = {v: {u for u in snap.sym_adj[v] if u in alive} for v in alive}
    return _components(adj)


def membership_strength(
    snap: Snapshot, core: Set[EntityId], entity: EntityId
) -> float:
    """Fraction of the entity's symmetrized weight that lands in the core."""
    if not core:
        raise ValueError("core must be non-empty")
    nbrs = snap.sym_adj.get(entity, {})
    total = sum(nbrs.values())
    if total == 0:
        return 0.0
    inside = sum(w for u, w in nbrs.items() if u in core and u != entity)
    return inside / total


def extract_groups(
    snap: Snapshot,
    params: GroupParams = GroupParams(),
    matrix: Optional[MeasureMatrix] = None,
    theme_source: Optional[Mapping[EntityId, str]] = None,
) -> list[Group]:
    """Extract groups with fuzzy membership and tiers for one snapshot.

    Cores come from the configured method; membership then covers every
    entity with positive strength toward the core, so membership maps of
    different groups may overlap. Strategies are filled when a measure
    matrix is supplied.
    """
    if params.method is GroupMethod.THRESHOLD_COMPONENTS:
        cores = _threshold_cores(snap, params.weight_threshold)
    else:
        cores = _kcore_cores(snap, params.k)

    groups: list[Group] = []
    for gi, core_nodes in enumerate(cores):
        core = frozenset(core_nodes)
        candidates = set(core)
        for member in core:
            candidates.update(snap.sym_adj.get(member, {}))
        membership: dict[EntityId, float] = {}
        tiers: dict[EntityId, Tier] = {}
        for entity in sorted(candidates):
            f = membership_strength(snap, core, entity)
            if f <= 0.0:
                continue
            membership[entity] = f
            tiers[entity] = classify_membership(f, params.tiers)
        group = Group(id=f"g{gi:03d}", core=core, membership=membership, tiers=tiers)
        if matrix is not None:
            group.strategy = infer_strategy(snap, group, matrix, theme_source)
        groups.append(group)
    return groups


def link_density(snap: Snapshot, members: Set[EntityId]) -> float:
    """Existing symmetrized member pairs over the possible n*(n-1)/2."""
    n = len(members)
    if n < 2:
        raise ValueError("link density needs at least 2 members")
    existing = 0
    for v in members:
        for u in snap.sym_adj.get(v, {}):
            if u in members and u > v:
                existing += 1
    return existing / (n * (n - 1) / 2)


@dataclass(frozen=True)
class CohesionResult:
    value: float
    isolated: bool = False


def group_cohesion(snap: Snapshot, members: Set[EntityId]) -> CohesionResult:
    """Mean internal neighbor count over mean external neighbor count.

    Neighbors are distinct in the symmetrized graph. A group with no
    external connections gets the +inf sentinel with ``isolated`` set.
    """
    n = len(members)
    if n < 2:
        raise ValueError("cohesion needs at least 2 members")
    if not any(v not in members for v in snap.nodes):
        raise ValueError("cohesion needs at least one non-member in the graph")
    internal = 0
    external = 0
    for v in members:
        for u in snap.sym_adj.get(v, {}):
            if u in members:
                internal += 1
            else:
                external += 1
    if external == 0:
        return CohesionResult(math.inf, isolated=True)
    return CohesionResult((internal / n) / (external / n))


def group_stability(members_t1: Set[EntityId], members_t2: Set[EntityId]) -> float:
    """Jaccard index of the two member sets."""
    if not members_t1 and not members_t2:
        raise ValueError("stability is undefined for two empty sets")
    union = len(members_t1 | members_t2)
    return len(members_t1 & members_t2) / union


@dataclass
class GroupMatch:
    prev_id: str
    next_id: str
    stability: float


@dataclass
class MatchResult:
    matched: list[GroupMatch] = field(default_factory=list)
    dissolved: list[str] = field(default_factory=list)
    emerged: list[str] = field(default_factory=list)


def match_groups_across_windows(
    groups_t1: Sequence[Group],
    groups_t2: Sequence[Group],
    min_stability: float = 0.5,
) -> MatchResult:
    """Greedy highest-stability matching on kernel sets.

    Unmatched earlier groups are dissolved, unmatched later groups emerged.
    Ties break on (previous id, next id), so the result is deterministic.
    """
    if not 0.0 < min_stability <= 1.0:
        raise ValueError(f"min_stability must be in (0,1], got {min_stability}")
    candidates = []
    for g1 in groups_t1:
        k1 = g1.kernel()
        for g2 in groups_t2:
            k2 = g2.kernel()
            if not k1 and not k2:
                continue
            stability = group_stability(k1, k2)
            if stability >= min_stability:
                candidates.append((-stability, g1.id, g2.id, stability))
    candidates.sort()
    result = MatchResult()
    used_prev: set[str] = set()
    used_next: set[str] = set()
    for _, prev_id, next_id, stability in candidates:
        if prev_id in used_prev or next_id in used_next:
            continue
        used_prev.add(prev_id)
        used_next.add(next_id)
        result.matched.append(GroupMatch(prev_id, next_id, stability))
    result.dissolved = [g.id for g in groups_t1 if g.id not in used_prev]
    result.emerged = [g.id for g in groups_t2 if g.id not in used_next]
    return result


def infer_strategy(
    snap: Snapshot,
    group: Group,
    matrix: MeasureMatrix,
    theme_source: Optional[Mapping[EntityId, str]] = None,
    top_k: int = 10,
) -> GroupStrategy:
    """Summarize a group: kernel mean of scaled measures plus theme tags.

    Theme tags are the strongest TF-IDF terms over kernel members'
    documents within the full supplied corpus; without a theme source the
    tag list stays empty.
    """
    kernel = sorted(group.kernel())
    index = {e: i for i, e in enumerate(matrix.entities)}
    missing = [e for e in kernel if e not in index]
    if missing:
        raise KeyError(f"matrix does not cover kernel members {missing}")
    summary: dict[MeasureId, float] = {}
    if kernel:
        rows = [index[e] for e in kernel]
        for measure, vec in matrix.scaled.items():
            summary[measure] = float(sum(vec[i] for i in rows) / len(rows))
    tags: tuple[str, ...] = ()
    if theme_source:
        from .blogs import tfidf_index

        docs = [(entity, text) for entity, text in sorted(theme_source.items())]
        index_tf = tfidf_index(docs)
        scores: dict[str, float] = {}
        for entity in kernel:
            vec = index_tf.vectors.get(entity)
            if vec is None:
                continue
            for term, weight in vec.weights.items():
                scores[term] = scores.get(term, 0.0) + weight
        ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        tags = tuple(term for term, _ in ranked[:top_k])
    return GroupStrategy(measure_summary=summary, theme_tags=tags)


# --- reporting ----------------------------------------------------------------


def group_to_dict(group: Group) -> dict:
    return {
        "id": group.id,
        "core": sorted(group.core),
        "membership": {e: group.membership[e] for e in sorted(group.membership)},
        "tiers": {e: group.tiers[e].name for e in sorted(group.tiers)},
        "strategy": {
            "measure_summary": {
                m.value: v for m, v in sorted(group.strategy.measure_summary.items())
            },
            "theme_tags": list(group.strategy.theme_tags),
        },
    }


def groups_report(
    snapshots: Sequence[Snapshot], groups_per_window: Sequence[Sequence[Group]]
) -> dict:
    """JSON-able per-window group listing with density and cohesion."""
    windows = []
    for wi, (snap, groups) in enumerate(zip(snapshots, groups_per_window)):
        entries = []
        for group in groups:
            entry = group_to_dict(group)
            members = group.members()
            entry["density"] = (
                link_density(snap, members) if len(members) >= 2 else None
            )
            cohesion = None
            isolated = False
            if len(members) >= 2 and any(v not in members for v in snap.nodes):
                res = group_cohesion(snap, members)
                cohesion = None if math.isinf(res.value) else res.value
                isolated = res.isolated
            entry["cohesion"] = cohesion
            entry["isolated"] = isolated
            entries.append(entry)
        windows.append(
            {
                "window": wi,
                "start": snap.window.start,
                "end": snap.window.end,
                "groups": entries,
            }
        )
    return {"windows": windows}


def write_groups_json(
    snapshots: Sequence[Snapshot],
    groups_per_window: Sequence[Sequence[Group]],
    path: str,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(groups_report(snapshots, groups_per_window), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_traces_csv(
    groups_per_window: Sequence[Sequence[Group]],
    path: str,
    min_stability: float = 0.5,
) -> list[MatchResult]:
    """Match consecutive windows and write the evolution trace CSV.

    Rows are ``window,group_id,matched_prev,stability,status`` with status
    Stable (matched to a predecessor), Emerged (no predecessor), or
    Dissolved (a previous-window group with no successor, reported in the
    window it vanished from).
    """
    matches: list[MatchResult] = []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "group_id", "matched_prev", "stability", "status"])
        prev_match: dict[str, GroupMatch] = {}
        for wi, groups in enumerate(groups_per_window):
            if wi > 0:
                result = match_groups_across_windows(
                    groups_per_window[wi - 1], groups, min_stability
                )
                matches.append(result)
                prev_match = {m.next_id: m for m in result.matched}
                for gone in result.dissolved:
                    writer.writerow([wi, gone, "", "", "Dissolved"])
            for group in groups:
                match = prev_match.get(group.id) if wi > 0 else None
                if match is not None:
                    writer.writerow(
                        [wi, group.id, match.prev_id, repr(float(match.stability)), "Stable"]
                    )
                else:
                    writer.writerow([wi, group.id, "", "", "Emerged"])
    return matches
