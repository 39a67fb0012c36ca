"""Seeded synthetic datasets for experiments and acceptance checks.

Two generators: a measure matrix with role-profile rows planted at band-center
percentiles against a correlated heavy-tailed background, and a
surveillance-shaped CDR corpus (a small fully-observed core, a mid tier,
and a long tail of peripheral numbers).
"""

from __future__ import annotations

import csv
from typing import Mapping, Sequence

import numpy as np

from .graph import EntityId, Kind
from .measures import ALL_MEASURES, MeasureId, MeasureMatrix, scale_to_bands
from .roles import RoleSet, table1_roles
from .telecom import CdrRecord, CellSite

# Latent-factor loading and noise scale per measure: centralities of one node
# co-vary in real networks, so the background must too.
_MEASURE_MIX: dict[MeasureId, tuple[float, float]] = {
    MeasureId.DEGREE_IN: (0.9, 0.5),
    MeasureId.DEGREE_OUT: (0.7, 0.7),
    MeasureId.BARY_CENTER: (0.5, 0.8),
    MeasureId.BETWEENNESS: (0.8, 0.9),
    MeasureId.HUBNESS: (0.6, 0.8),
    MeasureId.AUTHORITATIVENESS: (0.8, 0.6),
    MeasureId.PAGE_RANK: (0.9, 0.4),
    MeasureId.MARKOV: (0.7, 0.6),
}


def planted_role_matrix(
    seed: int,
    n_background: int = 1000,
    planted: Mapping[str, int] | None = None,
    roles: RoleSet | None = None,
) -> tuple[MeasureMatrix, dict[EntityId, str]]:
    """Background measure rows plus rows planted mid-band for given roles.

    ``planted`` maps role name -> count (default: 5 Organisers, 6
    Receivers). Planted raw values sit at the band-center quantile of the
    background distribution, so after percentile scaling they land mid-band
    for every measure the role templates pin.

    Returns the matrix and the entity -> role ground truth.
    """
    if planted is None:
        planted = {"Organiser": 5, "Receiver": 6}
    role_set = roles if roles is not None else table1_roles()
    templates = {t.name: t for t in role_set}
    for name in planted:
        if name not in templates:
            raise ValueError(f"no template named {name!r}")

    rng = np.random.default_rng(seed)
    latent = rng.normal(size=n_background)
    raw: dict[MeasureId, np.ndarray] = {}
    for measure in ALL_MEASURES:
        load, noise = _MEASURE_MIX[measure]
        raw[measure] = np.exp(load * latent + noise * rng.normal(size=n_background))

    entities = [f"n{i:04d}" for i in range(n_background)]
    truth: dict[EntityId, str] = {}
    columns = {m: [vec] for m, vec in raw.items()}
    counter = 0
    for role_name in sorted(planted):
        template = templates[role_name]
        for _ in range(planted[role_name]):
            entity = f"{role_name.lower()}{counter:02d}"
            counter += 1
            entities.append(entity)
            truth[entity] = role_name
            for measure in ALL_MEASURES:
                band = template.bands.get(measure)
                target = (band.low + band.high) / 2.0 / 10.0 if band else 0.5
                value = float(np.quantile(raw[measure], target))
                columns[measure].append(np.array([value]))

    matrix = MeasureMatrix(entities=tuple(entities))
    for measure in ALL_MEASURES:
        vec = np.concatenate(columns[measure])
        matrix.raw[measure] = vec
        matrix.scaled[measure] = scale_to_bands(vec)
        matrix.converged[measure] = True
    return matrix, truth


def synthetic_cdr(
    seed: int,
    n_entities: int = 7757,
    n_records: int = 133_197,
    n_cells: int = 200,
    days: int = 120,
    n_core: int = 24,
    n_mid: int = 500,
) -> tuple[list[CdrRecord], dict[str, CellSite]]:
    """Surveillance-shaped call corpus: hot core, mid tier, long tail.

    Every entity appears in at least one record. Timestamps spread
    uniformly over ``days``; roughly 70% of records are calls with
    lognormal durations, the rest SMS. Cells scatter around Krakow.
    """
    if n_records < n_entities:
        raise ValueError("need at least one record per entity")
    rng = np.random.default_rng(seed)
    ids = np.array([f"p{i:04d}" for i in range(n_entities)])

    cells: dict[str, CellSite] = {}
    cell_ids = [f"c{i:03d}" for i in range(n_cells)]
    lat = 50.06 + rng.uniform(-0.5, 0.5, size=n_cells)
    lon = 19.94 + rng.uniform(-0.7, 0.7, size=n_cells)
    for i, cid in enumerate(cell_ids):
        cells[cid] = CellSite(cid, float(lat[i]), float(lon[i]))
    home_count = rng.integers(1, 5, size=n_entities)
    homes = [
        rng.choice(n_cells, size=int(c), replace=False) for c in home_count
    ]

    weights = np.empty(n_entities)
    weights[:n_core] = 300.0
    weights[n_core : n_core + n_mid] = 10.0
    weights[n_core + n_mid :] = 0.3

    # Peripheral numbers are mostly one-way contacts of the observed core
    # (called once, or calling in); only a minority talk in both directions.
    n_hot = n_core + n_mid
    direction = rng.random(n_entities)
    can_call = np.ones(n_entities, dtype=bool)
    can_receive = np.ones(n_entities, dtype=bool)
    tail = np.arange(n_hot, n_entities)
    can_call[tail] = direction[tail] < 0.575
    can_receive[tail] = direction[tail] >= 0.425

    caller_p = np.where(can_call, weights, 0.0)
    caller_p /= caller_p.sum()
    callee_p = np.where(can_receive, weights, 0.0)
    callee_p /= callee_p.sum()

    n_free = n_records - n_entities
    callers = rng.choice(n_entities, size=n_free, p=caller_p)
    callees = rng.choice(n_entities, size=n_free, p=callee_p)
    # coverage: every entity appears at least once, on its allowed side
    cover_partner = rng.integers(0, n_core, size=n_entities)
    everyone = np.arange(n_entities)
    cover_callers = np.where(can_call, everyone, cover_partner)
    cover_callees = np.where(can_call, cover_partner, everyone)
    callers = np.concatenate([callers, cover_callers])
    callees = np.concatenate([callees, cover_callees])

    clash = callers == callees
    callers[clash] = (callers[clash] + 1) % n_core

    timestamps = np.sort(rng.integers(0, days * 86_400, size=n_records))
    is_call = rng.random(n_records) < 0.7
    durations = np.where(
        is_call, np.round(np.exp(rng.normal(3.5, 1.0, size=n_records))), 0.0
    )
    caller_cell_pick = rng.random(n_records)
    callee_cell_known = rng.random(n_records) < 0.8

    records: list[CdrRecord] = []
    for i in range(n_records):
        caller = int(callers[i])
        callee = int(callees[i])
        own = homes[caller]
        cell = cell_ids[int(own[int(caller_cell_pick[i] * len(own))])]
        callee_cell = None
        if callee_cell_known[i]:
            their = homes[callee]
            callee_cell = cell_ids[int(their[i % len(their)])]
        records.append(
            CdrRecord(
                caller=str(ids[caller]),
                callee=str(ids[callee]),
                timestamp=int(timestamps[i]),
                kind=Kind.CALL if is_call[i] else Kind.SMS,
                duration=float(durations[i]),
                cell_id=cell,
                callee_cell_id=callee_cell,
            )
        )
    return records, cells


def write_cdr_csv(records: Sequence[CdrRecord], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["caller", "callee", "timestamp", "kind", "duration", "cell_id", "callee_cell_id"]
        )
        for r in records:
            writer.writerow(
                [
                    r.caller,
                    r.callee,
                    r.timestamp,
                    r.kind.value,
                    int(r.duration) if r.duration == int(r.duration) else repr(r.duration),
                    r.cell_id or "",
                    r.callee_cell_id or "",
                ]
            )


def write_cells_csv(cells: Mapping[str, CellSite], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", "lat", "lon"])
        for cid in sorted(cells):
            site = cells[cid]
            writer.writerow([cid, repr(site.latitude), repr(site.longitude)])


def shifted_series(
    seed: int,
    length: int = 60,
    shift_at: int | None = 40,
    shift_sigma: float = 2.0,
) -> np.ndarray:
    """Unit-variance noise series with an optional mean shift partway in."""
    rng = np.random.default_rng(seed)
    values = rng.normal(0.0, 1.0, size=length)
    if shift_at is not None:
        values[shift_at:] += shift_sigma
    return values
