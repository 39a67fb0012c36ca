"""Role templates as per-measure band ranges and the resulting assignments.

A template names a role and pins a [low, high] band on the 0-10 scale for
a subset of measures. Scoring rewards rows inside every band with 1.0 and
fades linearly over one band-width (2.0 scale units) outside; assignment
picks the best-scoring template above an acceptance threshold, leaving the
rest Unclassified.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .graph import EntityId
from .measures import MeasureId, MeasureMatrix

UNCLASSIFIED = "Unclassified"

FALLOFF_WIDTH = 2.0


class RoleConfigError(ValueError):
    """Raised when a role template document is invalid."""


@dataclass(frozen=True)
class Band:
    low: float
    high: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.low < self.high <= 10.0):
            raise RoleConfigError(
                f"band must satisfy 0 <= low < high <= 10, got [{self.low}, {self.high}]"
            )

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high

    def distance(self, value: float) -> float:
        if value < self.low:
            return self.low - value
        if value > self.high:
            return value - self.high
        return 0.0


@dataclass(frozen=True)
class RoleTemplate:
    name: str
    bands: Mapping[MeasureId, Band]

    def __post_init__(self) -> None:
        if not self.name:
            raise RoleConfigError("role template needs a name")
        if not self.bands:
            raise RoleConfigError(f"template {self.name!r} has no bands")


class RoleSet:
    """Ordered collection of templates; declaration order breaks score ties."""

    def __init__(self, templates: Iterable[RoleTemplate] = ()):
        self.templates: tuple[RoleTemplate, ...] = tuple(templates)
        names = [t.name for t in self.templates]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise RoleConfigError(f"duplicate template names: {sorted(dupes)}")

    def __iter__(self):
        return iter(self.templates)

    def __len__(self) -> int:
        return len(self.templates)

    def names(self) -> list[str]:
        return [t.name for t in self.templates]


def _bands(**kwargs: tuple[float, float]) -> dict[MeasureId, Band]:
    return {MeasureId(k): Band(lo, hi) for k, (lo, hi) in kwargs.items()}


def table1_roles() -> RoleSet:
    """The built-in telecom role set: Organiser, Receiver, Soldier, Outsider."""
    return RoleSet(
        [
            RoleTemplate(
                "Organiser",
                _bands(
                    bary_center=(2, 4),
                    degree_in=(4, 6),
                    degree_out=(0, 2),
                    hubness=(0, 2),
                    authoritativeness=(8, 10),
                    page_rank=(2, 4),
                    betweenness=(4, 6),
                    markov_centrality=(6, 8),
                ),
            ),
            RoleTemplate(
                "Receiver",
                _bands(
                    bary_center=(2, 4),
                    degree_in=(8, 10),
                    degree_out=(2, 4),
                    hubness=(0, 2),
                    authoritativeness=(0, 2),
                    page_rank=(6, 8),
                    betweenness=(2, 4),
                    markov_centrality=(6, 8),
                ),
            ),
            RoleTemplate(
                "Soldier",
                _bands(
                    bary_center=(2, 4),
                    degree_in=(2, 6),
                    degree_out=(2, 4),
                    hubness=(0, 2),
                    authoritativeness=(0, 2),
                    page_rank=(0, 2),
                    betweenness=(0, 2),
                    markov_centrality=(0, 2),
                ),
            ),
            RoleTemplate(
                "Outsider",
                _bands(
                    bary_center=(0, 2),
                    degree_in=(0, 2),
                    degree_out=(0, 2),
                    hubness=(0, 2),
                    authoritativeness=(0, 2),
                    page_rank=(0, 2),
                    betweenness=(0, 2),
                    markov_centrality=(0, 2),
                ),
            ),
        ]
    )


_MEASURE_ALIASES = {m.value: m for m in MeasureId}
_MEASURE_ALIASES.update({"markov": MeasureId.MARKOV, "pagerank": MeasureId.PAGE_RANK})


def load_role_templates(document: str) -> RoleSet:
    """Parse the role template text format.

    One template per blank-line-separated block: the first line is the role
    name, each following line is ``measure: low..high``. ``#`` starts a
    comment. Unknown measures, inverted bands and duplicate names raise
    :class:`RoleConfigError` naming the offender.
    """
    templates: list[RoleTemplate] = []
    block: list[str] = []

    def flush() -> None:
        if not block:
            return
        name = block[0]
        bands: dict[MeasureId, Band] = {}
        for line in block[1:]:
            if ":" not in line:
                raise RoleConfigError(
                    f"template {name!r}: expected 'measure: low..high', got {line!r}"
                )
            key, _, rng = line.partition(":")
            key = key.strip().lower()
            if key not in _MEASURE_ALIASES:
                raise RoleConfigError(f"template {name!r}: unknown measure {key!r}")
            measure = _MEASURE_ALIASES[key]
            if measure in bands:
                raise RoleConfigError(f"template {name!r}: duplicate measure {key!r}")
            parts = rng.replace("..", " ").split()
            if len(parts) != 2:
                raise RoleConfigError(
                    f"template {name!r}: bad range {rng.strip()!r} for {key!r}"
                )
            try:
                band = Band(float(parts[0]), float(parts[1]))
            except RoleConfigError as exc:
                raise RoleConfigError(f"template {name!r}: {exc}") from None
            except ValueError:
                raise RoleConfigError(
                    f"template {name!r}: bad range {rng.strip()!r} for {key!r}"
                ) from None
            bands[measure] = band
        templates.append(RoleTemplate(name, bands))
        block.clear()

    for raw_line in document.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            flush()
            continue
        block.append(line)
    flush()
    return RoleSet(templates)


def load_role_source(source: str) -> RoleSet:
    """Resolve a role source: the keyword ``table1`` or a template file path."""
    if source.strip().lower() == "table1":
        return table1_roles()
    with open(source, encoding="utf-8") as fh:
        return load_role_templates(fh.read())


class MissingMeasureError(KeyError):
    """A scaled row lacks a measure the template bands."""


def score_role(
    scaled_row: Mapping[MeasureId, float],
    template: RoleTemplate,
    hard: bool = False,
) -> tuple[float, dict[MeasureId, float]]:
    """Match a scaled measure row against one template.

    Per measure: 1.0 inside the band, otherwise 1 - distance/2 clamped at 0
    (or a hard 0 when ``hard``). The score is the arithmetic mean.
    """
    per_measure: dict[MeasureId, float] = {}
    for measure, band in template.bands.items():
        if measure not in scaled_row:
            raise MissingMeasureError(measure.value)
        value = scaled_row[measure]
        if band.contains(value):
            per_measure[measure] = 1.0
        elif hard:
            per_measure[measure] = 0.0
        else:
            per_measure[measure] = max(0.0, 1.0 - band.distance(value) / FALLOFF_WIDTH)
    score = sum(per_measure.values()) / len(per_measure)
    return score, per_measure


@dataclass
class RoleAssignment:
    """Best-matching role for one entity.

    ``role`` is :data:`UNCLASSIFIED` when the best score fell below the
    acceptance threshold; ``score`` and ``per_measure`` still describe that
    best-scoring template (named in ``best_template``).
    """

    entity: EntityId
    role: str
    score: float
    per_measure: dict[MeasureId, float] = field(default_factory=dict)
    best_template: Optional[str] = None


def assign_roles(
    matrix: MeasureMatrix,
    roles: RoleSet,
    threshold: float = 0.75,
    hard: bool = False,
) -> list[RoleAssignment]:
    """Assign each entity its best-scoring role at or above ``threshold``.

    Ties go to the template declared first. An empty role set (or a best
    score below threshold) yields Unclassified.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0,1], got {threshold}")
    needed = {m for t in roles for m in t.bands}
    missing = needed - set(matrix.scaled)
    if missing:
        raise MissingMeasureError(sorted(m.value for m in missing)[0])

    assignments: list[RoleAssignment] = []
    columns = {m: matrix.scaled[m] for m in needed}
    for i, entity in enumerate(matrix.entities):
        row = {m: float(vec[i]) for m, vec in columns.items()}
        best: Optional[tuple[float, str, dict[MeasureId, float]]] = None
        for template in roles:
            score, per_measure = score_role(row, template, hard=hard)
            if best is None or score > best[0]:
                best = (score, template.name, per_measure)
        if best is None:
            assignments.append(RoleAssignment(entity, UNCLASSIFIED, 0.0))
            continue
        score, name, per_measure = best
        role = name if score >= threshold else UNCLASSIFIED
        assignments.append(RoleAssignment(entity, role, score, per_measure, name))
    return assignments


def assignments_to_csv(assignments: Sequence[RoleAssignment], path: str) -> None:
    """Write rows ``entity,role,score``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["entity", "role", "score"])
        for a in assignments:
            writer.writerow([a.entity, a.role, repr(float(a.score))])


def assignments_to_json(assignments: Sequence[RoleAssignment], path: str) -> None:
    """Full assignment detail including per-measure match values."""
    payload = [
        {
            "entity": a.entity,
            "role": a.role,
            "score": a.score,
            "best_template": a.best_template,
            "per_measure": {m.value: v for m, v in a.per_measure.items()},
        }
        for a in assignments
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
