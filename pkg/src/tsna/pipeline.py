"""Batch pipeline: ingest -> windows -> measures -> roles -> groups -> dynamics.

A JSON config drives the run; every artifact is written atomically and
listed with its content hash in ``manifest.json``. Runs are deterministic
for a fixed config and seed (no wall-clock data enters any artifact).

Exit codes: 0 ok, 1 validation failure, 2 runtime failure before any
artifact, 3 failure with partial artifacts retained.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .blogs import derive_interactions, parse_blog_dump
from .dynamics import (
    CusumParams,
    MeasureSeries,
    _estimate_baseline,
    agent_report,
    cusum_scan,
    export_series_csv,
    society_report,
)
from .graph import (
    InteractionStore,
    Snapshot,
    read_interactions_csv,
    snapshot as make_snapshot,
    window_series,
    TimeWindow,
)
from .groups import GroupMethod, GroupParams, TierThresholds, extract_groups, write_groups_json, write_traces_csv
from .measures import (
    ALL_MEASURES,
    MeasureId,
    MeasureMatrix,
    SolverParams,
    matrix_report,
    matrix_to_csv,
    measure_matrix,
)
from .roles import assign_roles, assignments_to_csv, assignments_to_json, load_role_source
from .exports import export_graph
from .telecom import parse_cdr, to_interactions

OUTPUT_DIR_ENV = "TSNA_OUTPUT_DIR"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL = 3


class PipelineConfigError(ValueError):
    """Invalid pipeline configuration."""


@dataclass
class PipelineConfig:
    input_kind: str
    input_paths: dict[str, str]
    output_dir: str
    seed: int
    window_width: int
    window_step: int
    measures: list[MeasureId] = field(default_factory=lambda: list(ALL_MEASURES))
    window_measures: list[MeasureId] = field(default_factory=lambda: list(ALL_MEASURES))
    solver: SolverParams = SolverParams()
    role_source: str = "table1"
    role_threshold: float = 0.75
    role_hard: bool = False
    groups: GroupParams = GroupParams()
    min_stability: float = 0.5
    cusum: CusumParams = CusumParams()
    cusum_measures: Optional[list[MeasureId]] = None
    agents: list[str] = field(default_factory=list)
    graph_formats: list[str] = field(default_factory=list)
    export_series: bool = True

    @staticmethod
    def from_dict(data: dict) -> "PipelineConfig":
        problems: list[str] = []

        def need(section: dict, key: str, where: str):
            if key not in section:
                problems.append(f"missing {where}.{key}" if where else f"missing {key}")
                return None
            return section[key]

        inp = data.get("input") or {}
        kind = need(inp, "kind", "input")
        if kind is not None and kind not in ("telecom", "blog", "generic"):
            problems.append(f"input.kind must be telecom|blog|generic, got {kind!r}")
        paths = {k: v for k, v in inp.items() if k != "kind"}

        output_dir = need(data, "output_dir", "")
        seed = need(data, "seed", "")
        if seed is not None and not isinstance(seed, int):
            problems.append("seed must be an integer")

        window = data.get("window") or {}
        width = need(window, "width", "window")
        step = window.get("step", width)
        for name, value in (("width", width), ("step", step)):
            if value is not None and (not isinstance(value, int) or value <= 0):
                problems.append(f"window.{name} must be a positive integer")

        def measure_list(key: str, default):
            names = data.get(key)
            if names is None:
                return default
            try:
                return [MeasureId(n) for n in names]
            except ValueError as exc:
                problems.append(f"{key}: {exc}")
                return default

        measures = measure_list("measures", list(ALL_MEASURES))
        wmeasures = measure_list("window_measures", list(measures))
        cus_measures = data.get("cusum_measures")
        cusum_measures = measure_list("cusum_measures", None) if cus_measures else None

        try:
            solver = SolverParams(**(data.get("solver") or {}))
        except (TypeError, ValueError) as exc:
            problems.append(f"solver: {exc}")
            solver = SolverParams()

        roles_cfg = data.get("roles") or {}
        role_source = roles_cfg.get("source", "table1")
        role_threshold = roles_cfg.get("threshold", 0.75)
        try:
            if not 0.0 <= float(role_threshold) <= 1.0:
                raise ValueError
        except (TypeError, ValueError):
            problems.append("roles.threshold must be a number in [0,1]")
            role_threshold = 0.75
        role_hard = bool(roles_cfg.get("hard", False))

        groups_cfg = dict(data.get("groups") or {})
        min_stability = groups_cfg.pop("min_stability", 0.5)
        try:
            if not 0.0 < float(min_stability) <= 1.0:
                raise ValueError
        except (TypeError, ValueError):
            problems.append("groups.min_stability must be a number in (0,1]")
            min_stability = 0.5
        tiers_cfg = groups_cfg.pop("tiers", None)
        try:
            tiers = TierThresholds(**tiers_cfg) if tiers_cfg else TierThresholds()
        except (TypeError, ValueError) as exc:
            problems.append(f"groups.tiers: {exc}")
            tiers = TierThresholds()
        method_name = groups_cfg.pop("method", GroupMethod.THRESHOLD_COMPONENTS.value)
        try:
            method = GroupMethod(method_name)
        except ValueError:
            problems.append(f"groups.method must be one of "
                            f"{[m.value for m in GroupMethod]}, got {method_name!r}")
            method = GroupMethod.THRESHOLD_COMPONENTS
        try:
            group_params = GroupParams(method=method, tiers=tiers, **groups_cfg)
        except (TypeError, ValueError) as exc:
            problems.append(f"groups: {exc}")
            group_params = GroupParams()

        try:
            cusum = CusumParams(**(data.get("cusum") or {}))
        except (TypeError, ValueError) as exc:
            problems.append(f"cusum: {exc}")
            cusum = CusumParams()

        graph_formats = list(data.get("graph_formats") or [])
        for fmt in graph_formats:
            if fmt not in ("graphml", "dot", "csv"):
                problems.append(f"graph_formats: unknown format {fmt!r}")

        if problems:
            raise PipelineConfigError("; ".join(problems))

        return PipelineConfig(
            input_kind=str(kind),
            input_paths={k: str(v) for k, v in paths.items()},
            output_dir=os.environ.get(OUTPUT_DIR_ENV) or str(output_dir),
            seed=int(seed),
            window_width=int(width),
            window_step=int(step),
            measures=measures,
            window_measures=wmeasures,
            solver=solver,
            role_source=str(role_source),
            role_threshold=float(role_threshold),
            role_hard=role_hard,
            groups=group_params,
            min_stability=float(min_stability),
            cusum=cusum,
            cusum_measures=cusum_measures,
            agents=[str(a) for a in data.get("agents") or []],
            graph_formats=graph_formats,
            export_series=bool(data.get("export_series", True)),
        )

    @staticmethod
    def from_json_file(path: str) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise PipelineConfigError(f"cannot read config {path}: {exc}") from None
        return PipelineConfig.from_dict(data)

    def echo(self) -> dict:
        """Config as written to the manifest."""
        return {
            "input_kind": self.input_kind,
            "input_paths": dict(sorted(self.input_paths.items())),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "window": {"width": self.window_width, "step": self.window_step},
            "measures": [m.value for m in self.measures],
            "window_measures": [m.value for m in self.window_measures],
            "solver": {
                "damping": self.solver.damping,
                "tolerance": self.solver.tolerance,
                "max_iterations": self.solver.max_iterations,
                "betweenness_exact_limit": self.solver.betweenness_exact_limit,
                "betweenness_pivots": self.solver.betweenness_pivots,
                "betweenness_exact": self.solver.betweenness_exact,
            },
            "roles": {
                "source": self.role_source,
                "threshold": self.role_threshold,
                "hard": self.role_hard,
            },
            "groups": {
                "method": self.groups.method.value,
                "weight_threshold": self.groups.weight_threshold,
                "k": self.groups.k,
                "tiers": {
                    "weak": self.groups.tiers.weak,
                    "circumjacent": self.groups.tiers.circumjacent,
                    "kernel": self.groups.tiers.kernel,
                },
                "min_stability": self.min_stability,
            },
            "cusum": {
                "reference": self.cusum.reference,
                "decision": self.cusum.decision,
                "baseline_windows": self.cusum.baseline_windows,
                "two_sided": self.cusum.two_sided,
            },
            "cusum_measures": [m.value for m in self.cusum_measures]
            if self.cusum_measures
            else None,
            "agents": list(self.agents),
            "graph_formats": list(self.graph_formats),
            "export_series": self.export_series,
        }


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class _ArtifactWriter:
    """Atomic writes plus the artifact registry for the manifest."""

    def __init__(self, output_dir: Path):
        self.output_dir = output_dir
        self.entries: dict[str, str] = {}

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def commit(self, name: str, build) -> Path:
        """Build into a temp file, rename it into place, record its hash."""
        final = self.path(name)
        tmp = final.with_name(final.name + ".tmp")
        build(str(tmp))
        os.replace(tmp, final)
        self.entries[name] = _sha256(final)
        return final

    def write_json(self, name: str, payload: dict) -> Path:
        def build(tmp: str) -> None:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")

        return self.commit(name, build)


@dataclass
class RunResult:
    exit_code: int
    manifest: dict
    output_dir: Path


def _ingest(config: PipelineConfig):
    kind = config.input_kind
    if kind == "telecom":
        cdr = config.input_paths.get("cdr")
        if not cdr:
            raise PipelineConfigError("telecom input needs input.cdr")
        records, cells, report = parse_cdr(cdr, config.input_paths.get("cells"))
        return to_interactions(records), report
    if kind == "blog":
        posts_path = config.input_paths.get("posts")
        comments_path = config.input_paths.get("comments")
        if not posts_path or not comments_path:
            raise PipelineConfigError("blog input needs input.posts and input.comments")
        posts, comments, report = parse_blog_dump(posts_path, comments_path)
        return derive_interactions(posts, comments), report
    path = config.input_paths.get("interactions")
    if not path:
        raise PipelineConfigError("generic input needs input.interactions")
    return read_interactions_csv(path)


def _bulk_series(
    snapshots: Sequence[Snapshot],
    matrices: Sequence[MeasureMatrix],
    measures: Sequence[MeasureId],
    baseline_windows: int,
) -> list[MeasureSeries]:
    indexes = [{e: i for i, e in enumerate(m.entities)} for m in matrices]
    subjects: set[str] = set()
    for matrix in matrices:
        subjects.update(matrix.entities)
    series = []
    for subject in sorted(subjects):
        rows = [
            (wi, indexes[wi][subject])
            for wi in range(len(matrices))
            if subject in indexes[wi]
        ]
        for measure in measures:
            points = [
                (wi, float(matrices[wi].raw[measure][i]))
                for wi, i in rows
                if measure in matrices[wi].raw
            ]
            if not points:
                continue
            head = [v for _, v in points[:baseline_windows]]
            series.append(
                MeasureSeries(
                    subject=subject,
                    measure=measure.value,
                    points=points,
                    baseline=_estimate_baseline(head),
                    n_windows=len(snapshots),
                )
            )
    return series


def _write_window_matrices_csv(
    path: str, matrices: Sequence[MeasureMatrix]
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "entity", "measure", "raw", "scaled"])
        for wi, matrix in enumerate(matrices):
            for measure in matrix.raw:
                raw = matrix.raw[measure]
                scaled = matrix.scaled[measure]
                for i, entity in enumerate(matrix.entities):
                    writer.writerow(
                        [
                            wi,
                            entity,
                            measure.value,
                            repr(float(raw[i])),
                            repr(float(scaled[i])),
                        ]
                    )


def _write_alarms_csv(path: str, series_list, params: CusumParams) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject", "measure", "window", "direction", "statistic"])
        for series in series_list:
            if len(series.points) <= params.baseline_windows:
                continue
            for cp in cusum_scan(series, params).alarms:
                writer.writerow(
                    [
                        series.subject,
                        series.measure,
                        cp.window,
                        cp.direction.value,
                        repr(float(cp.statistic)),
                    ]
                )


def run_pipeline(config: PipelineConfig, log=None) -> RunResult:
    """Execute the batch pipeline and write all artifacts plus the manifest."""

    def say(msg: str) -> None:
        if log is not None:
            print(msg, file=log)

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    writer = _ArtifactWriter(out)
    manifest: dict = {
        "version": __version__,
        "config": config.echo(),
        "inputs": {},
        "artifacts": {},
        "status": "running",
        "failure_stage": None,
    }
    stage = "validate"
    try:
        for name, path in sorted(config.input_paths.items()):
            if not Path(path).is_file():
                raise PipelineConfigError(f"input.{name}: no such file {path!r}")
            manifest["inputs"][name] = _sha256(Path(path))

        stage = "ingest"
        say(f"ingest: {config.input_kind}")
        interactions, report = _ingest(config)
        store = InteractionStore()
        ingest_report = store.add_interactions(interactions)
        writer.write_json(
            "ingest.json",
            {
                "kind": config.input_kind,
                "parsed": report.accepted,
                "parse_rejected": report.rejected,
                "stored": ingest_report.accepted,
                "store_rejected": ingest_report.rejected,
                "problems": report.problems[:100],
            },
        )

        stage = "snapshot"
        span = store.span()
        if span is None:
            raise ValueError("no interactions ingested; nothing to analyse")
        full_window = TimeWindow(span[0], span[1] + 1)
        full = make_snapshot(store, full_window)
        snapshots = window_series(store, config.window_width, config.window_step)
        say(f"snapshot: {full.n_nodes} nodes, {full.n_edges} edges, "
            f"{len(snapshots)} windows")

        stage = "measures"
        rng = np.random.default_rng(config.seed)
        full_matrix = measure_matrix(full, config.measures, config.solver, rng)
        writer.commit("measures_full.csv", lambda p: matrix_to_csv(full_matrix, p))
        writer.write_json("measures_full.json", matrix_report(full_matrix))
        matrices = []
        for snap in snapshots:
            matrices.append(
                measure_matrix(snap, config.window_measures, config.solver, rng)
            )
        writer.commit(
            "measures_windows.csv",
            lambda p: _write_window_matrices_csv(p, matrices),
        )
        writer.write_json(
            "measures_windows.json",
            {"windows": [matrix_report(m) for m in matrices]},
        )

        stage = "roles"
        role_set = load_role_source(config.role_source)
        assignments = assign_roles(
            full_matrix, role_set, config.role_threshold, config.role_hard
        )
        writer.commit("roles.csv", lambda p: assignments_to_csv(assignments, p))
        writer.commit("roles.json", lambda p: assignments_to_json(assignments, p))
        say(f"roles: {sum(1 for a in assignments if a.role != 'Unclassified')} classified")

        stage = "groups"
        groups_per_window = [
            extract_groups(snap, config.groups, matrix)
            for snap, matrix in zip(snapshots, matrices)
        ]
        writer.commit(
            "groups.json",
            lambda p: write_groups_json(snapshots, groups_per_window, p),
        )
        writer.commit(
            "traces.csv",
            lambda p: write_traces_csv(groups_per_window, p, config.min_stability),
        )

        stage = "dynamics"
        if len(snapshots) >= 2:
            writer.write_json("society.json", society_report(snapshots, matrices))
        cusum_measures = config.cusum_measures or config.window_measures
        series_list = _bulk_series(
            snapshots, matrices, cusum_measures, config.cusum.baseline_windows
        )
        writer.commit(
            "alarms.csv", lambda p: _write_alarms_csv(p, series_list, config.cusum)
        )
        if config.export_series:
            writer.commit(
                "series.csv",
                lambda p: export_series_csv(p, series_list, config.cusum),
            )
        agent_payload = []
        if config.agents:
            per_window_assignments = [
                {a.entity: a.role for a in assign_roles(m, role_set, config.role_threshold, config.role_hard)}
                for m in matrices
            ]
            for entity in config.agents:
                agent_payload.append(
                    agent_report(
                        entity, snapshots, matrices, per_window_assignments, config.cusum
                    )
                )
        writer.write_json("agents.json", {"agents": agent_payload})

        stage = "export"
        for fmt in config.graph_formats:
            ext = {"graphml": "graphml", "dot": "dot", "csv": "csv"}[fmt]
            writer.commit(
                f"graph_full.{ext}",
                lambda p, f=fmt: export_graph(full, p, f, assignments, full_matrix),
            )

        manifest["status"] = "ok"
        manifest["artifacts"] = dict(sorted(writer.entries.items()))
        writer.write_json("manifest.json", manifest)
        return RunResult(EXIT_OK, manifest, out)
    except Exception as exc:  # noqa: BLE001 - single failure funnel
        had_artifacts = bool(writer.entries)
        manifest["status"] = "failed"
        manifest["failure_stage"] = stage
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        manifest["artifacts"] = dict(sorted(writer.entries.items()))
        try:
            writer.write_json("manifest.json", manifest)
        except OSError:
            pass
        if isinstance(exc, PipelineConfigError) or stage == "validate":
            code = EXIT_VALIDATION
        elif had_artifacts:
            code = EXIT_PARTIAL
        else:
            code = EXIT_RUNTIME
        say(f"failed at {stage}: {exc}")
        return RunResult(code, manifest, out)
