"""Temporal interaction store and directed weighted graph snapshots.

The store keeps every raw interaction event (calls, SMS, blog comments) and
materializes immutable :class:`Snapshot` objects for arbitrary time windows.
Edge weights are interaction counts; per-source normalized connection
strengths live alongside the weights.
"""

from __future__ import annotations

import bisect
import csv
import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

EntityId = str


class Kind(enum.Enum):
    CALL = "call"
    SMS = "sms"
    COMMENT = "comment"


@dataclass(frozen=True)
class Interaction:
    """One timestamped directed contact event.

    ``duration`` is seconds (0 for SMS/comments). ``meta`` carries optional
    side data such as the serving cell id or the commented post id.
    """

    src: EntityId
    dst: EntityId
    timestamp: int
    kind: Kind
    duration: float = 0.0
    meta: Optional[Mapping[str, str]] = None


def interaction_problem(rec: Interaction) -> Optional[str]:
    """Return a description of the first invariant violation, or None."""
    if not rec.src:
        return "empty src"
    if not rec.dst:
        return "empty dst"
    if rec.timestamp < 0:
        return f"negative timestamp {rec.timestamp}"
    if rec.duration < 0:
        return f"negative duration {rec.duration}"
    return None


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval [start, end) in epoch seconds."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError(f"window start {self.start} must precede end {self.end}")

    def contains(self, ts: int) -> bool:
        return self.start <= ts < self.end


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    problems: list[str] = field(default_factory=list)


class InteractionStore:
    """Append-only holder for the full interaction history.

    Build-then-freeze: ingest everything, then derive snapshots. Snapshots
    are immutable values; the store itself is not safe for concurrent
    mutation.
    """

    def __init__(self) -> None:
        self._records: list[Interaction] = []
        self._timestamps: list[int] = []
        self._sorted = True

    def __len__(self) -> int:
        return len(self._records)

    def add_interactions(
        self, records: Iterable[Interaction], dedup: bool = False
    ) -> IngestReport:
        """Ingest records, rejecting invariant violations individually.

        Duplicates are kept by default: repeated calls are the weight
        semantics. With ``dedup`` set, exact duplicates of already-stored
        records are dropped.
        """
        report = IngestReport()
        seen = None
        if dedup:
            seen = {self._key(r) for r in self._records}
        for lineno, rec in enumerate(records, 1):
            problem = interaction_problem(rec)
            if problem is not None:
                report.rejected += 1
                report.problems.append(f"record {lineno}: {problem}")
                continue
            if seen is not None:
                key = self._key(rec)
                if key in seen:
                    continue
                seen.add(key)
            self._records.append(rec)
            report.accepted += 1
        self._sorted = False
        return report

    @staticmethod
    def _key(rec: Interaction) -> tuple:
        meta = tuple(sorted(rec.meta.items())) if rec.meta else ()
        return (rec.src, rec.dst, rec.timestamp, rec.kind, rec.duration, meta)

    def _ensure_sorted(self) -> None:
        if not self._sorted:
            self._records.sort(key=lambda r: r.timestamp)
            self._timestamps = [r.timestamp for r in self._records]
            self._sorted = True

    @property
    def records(self) -> Sequence[Interaction]:
        self._ensure_sorted()
        return self._records

    def span(self) -> Optional[tuple[int, int]]:
        """(min, max) timestamp over all records, or None when empty."""
        if not self._records:
            return None
        self._ensure_sorted()
        return self._records[0].timestamp, self._records[-1].timestamp

    def in_window(self, window: TimeWindow) -> Sequence[Interaction]:
        self._ensure_sorted()
        lo = bisect.bisect_left(self._timestamps, window.start)
        hi = bisect.bisect_left(self._timestamps, window.end)
        return self._records[lo:hi]


@dataclass(frozen=True)
class Snapshot:
    """Directed weighted graph induced by interactions inside one window.

    ``edges`` maps (src, dst) to the interaction count; self-loops are
    excluded. ``strengths`` holds the per-source max-normalized weight in
    (0, 1]; the strongest out-edge of every source is exactly 1. Node and
    edge orderings are deterministic (sorted), so identical inputs produce
    identical snapshots.
    """

    window: TimeWindow
    nodes: tuple[EntityId, ...]
    edges: Mapping[tuple[EntityId, EntityId], int]
    strengths: Mapping[tuple[EntityId, EntityId], float]

    @cached_property
    def index(self) -> dict[EntityId, int]:
        return {node: i for i, node in enumerate(self.nodes)}

    @cached_property
    def out_adj(self) -> dict[EntityId, dict[EntityId, int]]:
        adj: dict[EntityId, dict[EntityId, int]] = {v: {} for v in self.nodes}
        for (s, d), w in self.edges.items():
            adj[s][d] = w
        return adj

    @cached_property
    def in_adj(self) -> dict[EntityId, dict[EntityId, int]]:
        adj: dict[EntityId, dict[EntityId, int]] = {v: {} for v in self.nodes}
        for (s, d), w in self.edges.items():
            adj[d][s] = w
        return adj

    @cached_property
    def sym_adj(self) -> dict[EntityId, dict[EntityId, int]]:
        """Symmetrized adjacency: weight(a,b) + weight(b,a)."""
        adj: dict[EntityId, dict[EntityId, int]] = {v: {} for v in self.nodes}
        for (s, d), w in self.edges.items():
            adj[s][d] = adj[s].get(d, 0) + w
            adj[d][s] = adj[d].get(s, 0) + w
        return adj

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def snapshot(store: InteractionStore, window: TimeWindow) -> Snapshot:
    """Aggregate in-window interactions into a Snapshot.

    Self-interactions contribute their endpoints to the node set but never
    produce edges.
    """
    counts: dict[tuple[EntityId, EntityId], int] = {}
    nodes: set[EntityId] = set()
    for rec in store.in_window(window):
        nodes.add(rec.src)
        nodes.add(rec.dst)
        if rec.src == rec.dst:
            continue
        key = (rec.src, rec.dst)
        counts[key] = counts.get(key, 0) + 1

    max_out: dict[EntityId, int] = {}
    for (s, _), w in counts.items():
        if w > max_out.get(s, 0):
            max_out[s] = w

    ordered = dict(sorted(counts.items()))
    strengths = {key: w / max_out[key[0]] for key, w in ordered.items()}
    return Snapshot(
        window=window,
        nodes=tuple(sorted(nodes)),
        edges=ordered,
        strengths=strengths,
    )


def window_series(store: InteractionStore, width: int, step: int) -> list[Snapshot]:
    """Snapshots for rolling windows of ``width`` whose starts are ``step`` apart.

    Windows start at the earliest timestamp and keep coming until one covers
    the latest timestamp; overlapping windows (step < width) are fine.
    """
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    span = store.span()
    if span is None:
        return []
    lo, hi = span
    snaps = []
    start = lo
    while True:
        window = TimeWindow(start, start + width)
        snaps.append(snapshot(store, window))
        if window.end > hi:
            break
        start += step
    return snaps


def neighbors(snap: Snapshot, entity: EntityId) -> dict[EntityId, float]:
    """Union of out- and in-neighbors with their connection strengths.

    Out-neighbors report the stored out-strength; pure in-neighbors report
    the strength of the reversed edge. Unknown entities yield an empty map.
    """
    result: dict[EntityId, float] = {}
    for other in snap.in_adj.get(entity, {}):
        result[other] = snap.strengths[(other, entity)]
    for other in snap.out_adj.get(entity, {}):
        result[other] = snap.strengths[(entity, other)]
    return result


# --- generic interaction CSV ------------------------------------------------

_KIND_ALIASES = {k.value: k for k in Kind}

CSV_COLUMNS = ("src", "dst", "timestamp", "kind", "duration")


def _parse_timestamp(text: str, iso: bool) -> int:
    if iso:
        dt = datetime.fromisoformat(text)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    return int(text)


def read_interactions_csv(path: str) -> tuple[list[Interaction], IngestReport]:
    """Parse the generic interaction CSV.

    Header ``src,dst,timestamp,kind,duration`` plus optional meta columns.
    Timestamps are integer epoch seconds or ISO-8601; the format is detected
    from the first data row and must be uniform within the file. Malformed
    rows are rejected with a line diagnostic; parsing continues.
    """
    report = IngestReport()
    records: list[Interaction] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        meta_cols = [c for c in (reader.fieldnames or []) if c not in CSV_COLUMNS]
        iso: Optional[bool] = None
        for lineno, row in enumerate(reader, 2):
            try:
                if iso is None:
                    iso = not row["timestamp"].strip().lstrip("-").isdigit()
                ts = _parse_timestamp(row["timestamp"].strip(), iso)
                kind = _KIND_ALIASES[row["kind"].strip().lower()]
                duration = float(row["duration"]) if row["duration"].strip() else 0.0
                meta = {c: row[c] for c in meta_cols if row.get(c)}
                rec = Interaction(
                    src=row["src"].strip(),
                    dst=row["dst"].strip(),
                    timestamp=ts,
                    kind=kind,
                    duration=duration,
                    meta=meta or None,
                )
            except (KeyError, ValueError) as exc:
                report.rejected += 1
                report.problems.append(f"line {lineno}: {exc}")
                continue
            problem = interaction_problem(rec)
            if problem is not None:
                report.rejected += 1
                report.problems.append(f"line {lineno}: {problem}")
                continue
            records.append(rec)
            report.accepted += 1
    return records, report


def write_interactions_csv(path: str, records: Iterable[Interaction]) -> None:
    """Write records in the generic CSV format (meta flattened to columns)."""
    records = list(records)
    meta_cols: list[str] = []
    for rec in records:
        if rec.meta:
            for key in rec.meta:
                if key not in meta_cols:
                    meta_cols.append(key)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(CSV_COLUMNS) + meta_cols)
        for rec in records:
            row = [
                rec.src,
                rec.dst,
                rec.timestamp,
                rec.kind.value,
                repr(rec.duration) if rec.duration else "0",
            ]
            row.extend((rec.meta or {}).get(c, "") for c in meta_cols)
            writer.writerow(row)
