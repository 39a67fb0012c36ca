"""Measure time series over window sequences and CUSUM change detection.

Series carry explicit gaps for windows where the subject is absent; gaps
never feed the detector. The detector is the standard two-sided tabular
CUSUM on values standardized against a baseline estimated from the first
windows (or supplied), with reference and decision values in sigma units.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .graph import EntityId, Snapshot, neighbors
from .measures import MeasureId, MeasureMatrix
from .groups import Group, Tier, group_cohesion, link_density

SIGMA_FLOOR = 1e-9


@dataclass(frozen=True)
class CusumParams:
    reference: float = 0.5
    decision: float = 5.0
    baseline_windows: int = 10
    two_sided: bool = True

    def __post_init__(self) -> None:
        if self.reference < 0:
            raise ValueError(f"reference must be >= 0, got {self.reference}")
        if self.decision <= 0:
            raise ValueError(f"decision must be > 0, got {self.decision}")
        if self.baseline_windows < 1:
            raise ValueError("baseline_windows must be a positive integer")


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class ChangePoint:
    window: int
    direction: Direction
    statistic: float


@dataclass
class MeasureSeries:
    """Per-window values for one (subject, measure) pair.

    ``points`` holds (window index, value) for windows where the subject
    exists; missing windows are gaps, not zeros. ``baseline`` is (mu0,
    sigma0) with sigma floored at :data:`SIGMA_FLOOR` so a perfectly
    constant baseline alarms on any deviation.
    """

    subject: str
    measure: str
    points: list[tuple[int, float]]
    baseline: tuple[float, float]
    n_windows: int


def _estimate_baseline(values: Sequence[float]) -> tuple[float, float]:
    mu = sum(values) / len(values)
    var = sum((v - mu) ** 2 for v in values) / len(values)
    return mu, max(math.sqrt(var), SIGMA_FLOOR)


def measure_series(
    snapshots: Sequence[Snapshot],
    matrices: Sequence[MeasureMatrix],
    subject: EntityId,
    measure: MeasureId,
    baseline_windows: int = 10,
    baseline: Optional[tuple[float, float]] = None,
) -> MeasureSeries:
    """Build the raw-measure series of one entity across windows.

    The baseline defaults to mean/stddev of the first ``baseline_windows``
    non-gap points; pass ``baseline`` to supply it instead.
    """
    points: list[tuple[int, float]] = []
    for wi, matrix in enumerate(matrices):
        vec = matrix.raw.get(measure)
        if vec is None:
            continue
        try:
            i = matrix.entities.index(subject)
        except ValueError:
            continue
        points.append((wi, float(vec[i])))
    if not points:
        raise ValueError(f"subject {subject!r} appears in no window")
    if baseline is None:
        head = [v for _, v in points[:baseline_windows]]
        baseline = _estimate_baseline(head)
    mu0, sigma0 = baseline
    return MeasureSeries(
        subject=subject,
        measure=measure.value,
        points=points,
        baseline=(mu0, max(sigma0, SIGMA_FLOOR)),
        n_windows=len(snapshots),
    )


@dataclass
class CusumScan:
    """Full trajectory of both statistics, aligned with series points."""

    windows: list[int]
    values: list[float]
    up: list[float]
    down: list[float]
    alarms: list[ChangePoint]


def cusum_scan(series: MeasureSeries, params: CusumParams = CusumParams()) -> CusumScan:
    """Run the tabular CUSUM recursion over all non-gap points.

    Standardize z = (x - mu0) / sigma0, accumulate S+ = max(0, S+ + z - k)
    and S- = max(0, S- - z - k), alarm when a statistic reaches the
    decision value, then reset that statistic and keep scanning; several
    alarms per series are possible.
    """
    if len(series.points) <= params.baseline_windows:
        raise ValueError(
            f"series has {len(series.points)} points; needs more than "
            f"{params.baseline_windows}"
        )
    mu0, sigma0 = series.baseline
    k = params.reference
    h = params.decision
    s_up = 0.0
    s_down = 0.0
    scan = CusumScan([], [], [], [], [])
    for window, value in series.points:
        z = (value - mu0) / sigma0
        s_up = max(0.0, s_up + z - k)
        if params.two_sided:
            s_down = max(0.0, s_down - z - k)
        if s_up >= h:
            scan.alarms.append(ChangePoint(window, Direction.UP, s_up))
            s_up = 0.0
        if params.two_sided and s_down >= h:
            scan.alarms.append(ChangePoint(window, Direction.DOWN, s_down))
            s_down = 0.0
        scan.windows.append(window)
        scan.values.append(value)
        scan.up.append(s_up)
        scan.down.append(s_down)
    return scan


def cusum_detect(
    series: MeasureSeries, params: CusumParams = CusumParams()
) -> list[ChangePoint]:
    """Change points where a CUSUM statistic reached the decision value."""
    return cusum_scan(series, params).alarms


# --- evolution reports ---------------------------------------------------------


def _summary(values: Sequence[float]) -> dict:
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        return {"min": None, "median": None, "max": None, "mean": None}
    mid = n // 2
    median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2
    return {
        "min": ordered[0],
        "median": median,
        "max": ordered[-1],
        "mean": sum(ordered) / n,
    }


def society_report(
    snapshots: Sequence[Snapshot], matrices: Sequence[MeasureMatrix]
) -> dict:
    """Collective view: per-window structure, measure summaries, top lists.

    Needs at least two windows; deltas compare consecutive windows.
    """
    if len(snapshots) < 2:
        raise ValueError("society report needs at least 2 windows")
    windows = []
    for wi, (snap, matrix) in enumerate(zip(snapshots, matrices)):
        measures = {}
        for measure, vec in matrix.raw.items():
            ranked = sorted(
                zip(matrix.entities, vec.tolist()), key=lambda kv: (-kv[1], kv[0])
            )
            measures[measure.value] = {
                "summary": _summary(vec.tolist()),
                "top": [{"entity": e, "value": v} for e, v in ranked[:10]],
            }
        windows.append(
            {
                "window": wi,
                "start": snap.window.start,
                "end": snap.window.end,
                "nodes": snap.n_nodes,
                "edges": snap.n_edges,
                "measures": measures,
            }
        )
    deltas = []
    for prev, cur in zip(windows, windows[1:]):
        measure_deltas = {}
        for name, block in cur["measures"].items():
            prev_block = prev["measures"].get(name)
            if prev_block and prev_block["summary"]["mean"] is not None:
                mean_prev = prev_block["summary"]["mean"]
                mean_cur = block["summary"]["mean"]
                measure_deltas[name] = (
                    mean_cur - mean_prev if mean_cur is not None else None
                )
        deltas.append(
            {
                "from": prev["window"],
                "to": cur["window"],
                "nodes": cur["nodes"] - prev["nodes"],
                "edges": cur["edges"] - prev["edges"],
                "mean_raw": measure_deltas,
            }
        )
    return {"windows": windows, "deltas": deltas}


def _jaccard(a: set, b: set) -> Optional[float]:
    union = a | b
    if not union:
        return None
    return len(a & b) / len(union)


def agent_report(
    entity: EntityId,
    snapshots: Sequence[Snapshot],
    matrices: Sequence[MeasureMatrix],
    assignments_per_window: Optional[Sequence[dict[EntityId, str]]] = None,
    cusum_params: CusumParams = CusumParams(),
) -> dict:
    """Single-entity view: rows, roles, neighborhoods, and change points."""
    per_window = []
    for wi, (snap, matrix) in enumerate(zip(snapshots, matrices)):
        if entity not in snap.index:
            continue
        role = None
        if assignments_per_window is not None:
            role = assignments_per_window[wi].get(entity)
        per_window.append(
            {
                "window": wi,
                "raw": {m.value: v for m, v in matrix.raw_row(entity).items()},
                "scaled": {m.value: v for m, v in matrix.scaled_row(entity).items()},
                "role": role,
                "neighbors": dict(sorted(neighbors(snap, entity).items())),
            }
        )
    if not per_window:
        raise ValueError(f"entity {entity!r} appears in no window")

    transitions = []
    for prev, cur in zip(per_window, per_window[1:]):
        entry: dict = {
            "from": prev["window"],
            "to": cur["window"],
            "neighbor_jaccard": _jaccard(
                set(prev["neighbors"]), set(cur["neighbors"])
            ),
        }
        if prev["role"] != cur["role"]:
            entry["role_change"] = {"from": prev["role"], "to": cur["role"]}
        transitions.append(entry)

    change_points: dict[str, list] = {}
    if matrices:
        for measure in matrices[0].raw:
            try:
                series = measure_series(
                    snapshots,
                    matrices,
                    entity,
                    measure,
                    baseline_windows=cusum_params.baseline_windows,
                )
                alarms = cusum_detect(series, cusum_params)
            except ValueError:
                continue
            change_points[measure.value] = [
                {
                    "window": cp.window,
                    "direction": cp.direction.value,
                    "statistic": cp.statistic,
                }
                for cp in alarms
            ]
    return {
        "entity": entity,
        "windows": per_window,
        "transitions": transitions,
        "change_points": change_points,
    }


def group_report(
    trace_entries: Sequence[tuple[int, str, Optional[float]]],
    snapshots: Sequence[Snapshot],
    groups_per_window: Sequence[Sequence[Group]],
) -> dict:
    """One group lineage across windows: structure, churn, strategy drift.

    ``trace_entries`` lists (window index, group id, stability vs the
    predecessor entry; None for the first).
    """
    if not trace_entries:
        raise ValueError("empty group trace")
    by_window = [
        {g.id: g for g in groups} for groups in groups_per_window
    ]
    steps = []
    prev_group: Optional[Group] = None
    for wi, gid, stability in trace_entries:
        group = by_window[wi][gid]
        snap = snapshots[wi]
        members = group.members()
        density = link_density(snap, members) if len(members) >= 2 else None
        cohesion = None
        if len(members) >= 2 and any(v not in members for v in snap.nodes):
            res = group_cohesion(snap, members)
            cohesion = None if math.isinf(res.value) else res.value
        tier_counts = {t.name: 0 for t in _TIER_ORDER}
        for tier in group.tiers.values():
            tier_counts[tier.name] += 1
        step: dict = {
            "window": wi,
            "group_id": gid,
            "density": density,
            "cohesion": cohesion,
            "tier_counts": tier_counts,
            "strategy": {
                m.value: v for m, v in sorted(group.strategy.measure_summary.items())
            },
        }
        if prev_group is not None:
            churn = {}
            for tier in _TIER_ORDER:
                before = {e for e, t in prev_group.tiers.items() if t is tier}
                after = {e for e, t in group.tiers.items() if t is tier}
                churn[tier.name] = {
                    "entered": sorted(after - before),
                    "left": sorted(before - after),
                }
            drift = _strategy_drift(
                prev_group.strategy.measure_summary, group.strategy.measure_summary
            )
            step["transition"] = {
                "stability": stability,
                "churn": churn,
                "strategy_drift": drift,
            }
        steps.append(step)
        prev_group = group
    return {"trace": steps}


_TIER_ORDER = (Tier.KERNEL, Tier.CIRCUMJACENT, Tier.WEAK, Tier.NOT_RELATED)


def _strategy_drift(
    a: dict[MeasureId, float], b: dict[MeasureId, float]
) -> float:
    keys = set(a) | set(b)
    return sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def export_series_csv(
    path: str,
    series_list: Sequence[MeasureSeries],
    params: CusumParams = CusumParams(),
) -> None:
    """Write ``subject,measure,window,value,cusum_up,cusum_down,alarm`` rows.

    Series too short for the detector are written with empty statistic
    columns.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["subject", "measure", "window", "value", "cusum_up", "cusum_down", "alarm"]
        )
        for series in series_list:
            try:
                scan = cusum_scan(series, params)
            except ValueError:
                for window, value in series.points:
                    writer.writerow(
                        [series.subject, series.measure, window, repr(value), "", "", ""]
                    )
                continue
            alarm_at = {cp.window: cp.direction.value for cp in scan.alarms}
            for i, window in enumerate(scan.windows):
                writer.writerow(
                    [
                        series.subject,
                        series.measure,
                        window,
                        repr(scan.values[i]),
                        repr(scan.up[i]),
                        repr(scan.down[i]),
                        alarm_at.get(window, ""),
                    ]
                )
