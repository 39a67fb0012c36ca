"""Call-detail-record ingest and per-user behavior profiles.

Beyond the generic interaction graph, CDRs feed domain measures: mobility
across cells, spatial reach of calls, call/SMS volumes per day, interlocutor
counts, and the activity period. Profiles are computed from whatever records
exist (surveillance data is partially observed); ``observed_records`` lets
an analyst judge coverage.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .graph import EntityId, Interaction, IngestReport, Kind

EARTH_RADIUS_KM = 6371.0

SECONDS_PER_DAY = 86_400


@dataclass(frozen=True)
class CdrRecord:
    """One logged phone event.

    ``cell_id`` is the caller's serving cell, ``callee_cell_id`` the
    callee's when the operator provides both sides. Zero-length calls
    exist, so duration 0 does not imply SMS.
    """

    caller: EntityId
    callee: EntityId
    timestamp: int
    kind: Kind
    duration: float = 0.0
    cell_id: Optional[str] = None
    callee_cell_id: Optional[str] = None


@dataclass(frozen=True)
class CellSite:
    cell_id: str
    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude}")


@dataclass
class TelecomProfile:
    entity: EntityId
    mobility: int
    spatial_range_out: Optional[float]
    spatial_range_in: Optional[float]
    mean_call_length: Optional[float]
    avg_out_calls_per_day: float
    avg_in_calls_per_day: float
    avg_out_sms_per_day: float
    avg_in_sms_per_day: float
    distinct_in_interlocutors: int
    distinct_out_interlocutors: int
    calls_sms_ratio: float
    activity_period: tuple[int, int]
    observed_records: int


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance on a 6371 km sphere."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlon = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


_CDR_KINDS = {"call": Kind.CALL, "sms": Kind.SMS}

CDR_COLUMNS = ("caller", "callee", "timestamp", "kind", "duration", "cell_id")


def parse_cdr(
    path: str, cells_path: Optional[str] = None
) -> tuple[list[CdrRecord], dict[str, CellSite], IngestReport]:
    """Load CDR rows and, optionally, the cell site table.

    CDR CSV columns: ``caller,callee,timestamp,kind,duration,cell_id`` plus
    an optional ``callee_cell_id``. Cells CSV: ``cell_id,lat,lon``.
    Malformed rows are skipped with a diagnostic; records may reference
    cells missing from the table (their geometry simply stays unknown).
    """
    cells: dict[str, CellSite] = {}
    report = IngestReport()
    if cells_path is not None:
        with open(cells_path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.DictReader(fh), 2):
                try:
                    site = CellSite(
                        cell_id=row["cell_id"].strip(),
                        latitude=float(row["lat"]),
                        longitude=float(row["lon"]),
                    )
                except (KeyError, ValueError) as exc:
                    report.rejected += 1
                    report.problems.append(f"{cells_path}:{lineno}: {exc}")
                    continue
                cells[site.cell_id] = site

    records: list[CdrRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CDR_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, 2):
            try:
                rec = CdrRecord(
                    caller=row["caller"].strip(),
                    callee=row["callee"].strip(),
                    timestamp=int(row["timestamp"]),
                    kind=_CDR_KINDS[row["kind"].strip().lower()],
                    duration=float(row["duration"]) if row["duration"].strip() else 0.0,
                    cell_id=row["cell_id"].strip() or None,
                    callee_cell_id=(row.get("callee_cell_id") or "").strip() or None,
                )
            except (KeyError, ValueError) as exc:
                report.rejected += 1
                report.problems.append(f"{path}:{lineno}: {exc}")
                continue
            if not rec.caller or not rec.callee or rec.timestamp < 0 or rec.duration < 0:
                report.rejected += 1
                report.problems.append(f"{path}:{lineno}: invalid field values")
                continue
            records.append(rec)
            report.accepted += 1
    return records, cells, report


def _span_days(first: int, last: int) -> int:
    return max(1, math.ceil((last - first) / SECONDS_PER_DAY))


def telecom_profile(
    records: Sequence[CdrRecord],
    cells: Mapping[str, CellSite],
    entity: EntityId,
) -> TelecomProfile:
    """Compute the behavior profile of one entity from its records."""
    mine = [r for r in records if r.caller == entity or r.callee == entity]
    if not mine:
        raise ValueError(f"entity {entity!r} appears in no record")

    first = min(r.timestamp for r in mine)
    last = max(r.timestamp for r in mine)
    days = _span_days(first, last)

    own_cells: set[str] = set()
    out_calls = in_calls = out_sms = in_sms = 0
    out_partners: set[EntityId] = set()
    in_partners: set[EntityId] = set()
    call_lengths: list[float] = []
    range_out: Optional[float] = None
    range_in: Optional[float] = None

    for rec in mine:
        outgoing = rec.caller == entity
        if outgoing and rec.cell_id:
            own_cells.add(rec.cell_id)
        if not outgoing and rec.callee_cell_id:
            own_cells.add(rec.callee_cell_id)
        if rec.kind is Kind.CALL:
            call_lengths.append(rec.duration)
            if outgoing:
                out_calls += 1
            if rec.callee == entity:
                in_calls += 1
            caller_site = cells.get(rec.cell_id) if rec.cell_id else None
            callee_site = (
                cells.get(rec.callee_cell_id) if rec.callee_cell_id else None
            )
            if caller_site and callee_site:
                dist = haversine_km(
                    caller_site.latitude,
                    caller_site.longitude,
                    callee_site.latitude,
                    callee_site.longitude,
                )
                if outgoing and (range_out is None or dist > range_out):
                    range_out = dist
                if rec.callee == entity and (range_in is None or dist > range_in):
                    range_in = dist
        else:
            if outgoing:
                out_sms += 1
            if rec.callee == entity:
                in_sms += 1
        if outgoing and rec.callee != entity:
            out_partners.add(rec.callee)
        if rec.callee == entity and rec.caller != entity:
            in_partners.add(rec.caller)

    total_calls = sum(1 for r in mine if r.kind is Kind.CALL)
    total_sms = len(mine) - total_calls
    if total_sms == 0:
        ratio = math.inf if total_calls else 0.0
    else:
        ratio = total_calls / total_sms

    return TelecomProfile(
        entity=entity,
        mobility=len(own_cells),
        spatial_range_out=range_out,
        spatial_range_in=range_in,
        mean_call_length=(sum(call_lengths) / len(call_lengths)) if call_lengths else None,
        avg_out_calls_per_day=out_calls / days,
        avg_in_calls_per_day=in_calls / days,
        avg_out_sms_per_day=out_sms / days,
        avg_in_sms_per_day=in_sms / days,
        distinct_in_interlocutors=len(in_partners),
        distinct_out_interlocutors=len(out_partners),
        calls_sms_ratio=ratio,
        activity_period=(first, last),
        observed_records=len(mine),
    )


def to_interactions(records: Iterable[CdrRecord]) -> list[Interaction]:
    """One Interaction per CDR, kind preserved, cell ids in meta."""
    out = []
    for rec in records:
        meta: dict[str, str] = {}
        if rec.cell_id:
            meta["cell_id"] = rec.cell_id
        if rec.callee_cell_id:
            meta["callee_cell_id"] = rec.callee_cell_id
        out.append(
            Interaction(
                src=rec.caller,
                dst=rec.callee,
                timestamp=rec.timestamp,
                kind=rec.kind,
                duration=rec.duration,
                meta=meta or None,
            )
        )
    return out


def profiles_to_csv(profiles: Sequence[TelecomProfile], path: str) -> None:
    """One row per entity with every profile field."""
    fields = [
        "entity",
        "mobility",
        "spatial_range_out",
        "spatial_range_in",
        "mean_call_length",
        "avg_out_calls_per_day",
        "avg_in_calls_per_day",
        "avg_out_sms_per_day",
        "avg_in_sms_per_day",
        "distinct_in_interlocutors",
        "distinct_out_interlocutors",
        "calls_sms_ratio",
        "first_seen",
        "last_seen",
        "observed_records",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for p in profiles:
            writer.writerow(
                [
                    p.entity,
                    p.mobility,
                    _fmt(p.spatial_range_out),
                    _fmt(p.spatial_range_in),
                    _fmt(p.mean_call_length),
                    _fmt(p.avg_out_calls_per_day),
                    _fmt(p.avg_in_calls_per_day),
                    _fmt(p.avg_out_sms_per_day),
                    _fmt(p.avg_in_sms_per_day),
                    p.distinct_in_interlocutors,
                    p.distinct_out_interlocutors,
                    "inf" if math.isinf(p.calls_sms_ratio) else repr(p.calls_sms_ratio),
                    p.activity_period[0],
                    p.activity_period[1],
                    p.observed_records,
                ]
            )


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def profile_to_dict(p: TelecomProfile) -> dict:
    return {
        "entity": p.entity,
        "mobility": p.mobility,
        "spatial_range_out": p.spatial_range_out,
        "spatial_range_in": p.spatial_range_in,
        "mean_call_length": p.mean_call_length,
        "avg_out_calls_per_day": p.avg_out_calls_per_day,
        "avg_in_calls_per_day": p.avg_in_calls_per_day,
        "avg_out_sms_per_day": p.avg_out_sms_per_day,
        "avg_in_sms_per_day": p.avg_in_sms_per_day,
        "distinct_in_interlocutors": p.distinct_in_interlocutors,
        "distinct_out_interlocutors": p.distinct_out_interlocutors,
        "calls_sms_ratio": None if math.isinf(p.calls_sms_ratio) else p.calls_sms_ratio,
        "activity_period": list(p.activity_period),
        "observed_records": p.observed_records,
    }
