"""Command-line driver. Subcommands compose through the documented files.

    ingest     normalize telecom/blog/generic input into the interaction CSV
    measure    interaction CSV -> measure matrix CSV (+ convergence JSON)
    roles      matrix CSV + templates -> role assignment CSV/JSON
    groups     interaction CSV -> per-window group JSON + trace CSV
    dynamics   interaction CSV -> society report + series/alarms CSV
    blogs      index | similar over a post/comment dump
    profiles   telecom behavior profiles from a CDR file
    export     interaction CSV -> GraphML / DOT / edge CSV
    hist       one CSV column -> histogram CSV
    run        whole pipeline from a JSON config
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .blogs import (
    aggregate_author_documents,
    parse_blog_dump,
    derive_interactions,
    similar_documents,
    tfidf_index,
)
from .dynamics import CusumParams, export_series_csv, society_report
from .exports import emit_histogram, export_graph, histogram_to_csv, linear_edges, log_edges
from .graph import (
    InteractionStore,
    TimeWindow,
    read_interactions_csv,
    snapshot,
    window_series,
    write_interactions_csv,
)
from .groups import GroupMethod, GroupParams, TierThresholds, extract_groups, write_groups_json, write_traces_csv
from .measures import (
    ALL_MEASURES,
    MeasureId,
    SolverParams,
    matrix_from_csv,
    matrix_report_to_json,
    matrix_to_csv,
    measure_matrix,
)
from .pipeline import EXIT_RUNTIME, EXIT_VALIDATION, PipelineConfig, PipelineConfigError, run_pipeline
from .roles import assign_roles, assignments_to_csv, assignments_to_json, load_role_source
from .telecom import parse_cdr, profile_to_dict, profiles_to_csv, telecom_profile, to_interactions


def _load_store(path: str) -> InteractionStore:
    records, report = read_interactions_csv(path)
    if report.rejected:
        print(f"warning: {report.rejected} rejected rows", file=sys.stderr)
    store = InteractionStore()
    store.add_interactions(records)
    return store


def _full_snapshot(store: InteractionStore):
    span = store.span()
    if span is None:
        raise SystemExit("input holds no interactions")
    return snapshot(store, TimeWindow(span[0], span[1] + 1))


def _parse_measures(names: str | None) -> list[MeasureId]:
    if not names:
        return list(ALL_MEASURES)
    return [MeasureId(n.strip()) for n in names.split(",") if n.strip()]


def _cmd_ingest(args: argparse.Namespace) -> int:
    if args.kind == "telecom":
        records, _, report = parse_cdr(args.input, args.cells)
        interactions = to_interactions(records)
    elif args.kind == "blog":
        posts, comments, report = parse_blog_dump(args.input, args.comments)
        interactions = derive_interactions(posts, comments)
    else:
        interactions, report = read_interactions_csv(args.input)
    write_interactions_csv(args.output, interactions)
    print(
        f"accepted {report.accepted}, rejected {report.rejected}, "
        f"wrote {len(interactions)} interactions to {args.output}"
    )
    return 0


def _cmd_measure(args: argparse.Namespace) -> int:
    store = _load_store(args.input)
    if args.window:
        start, end = (int(x) for x in args.window.split(":"))
        snap = snapshot(store, TimeWindow(start, end))
    else:
        snap = _full_snapshot(store)
    params = SolverParams(
        damping=args.damping,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        betweenness_exact=args.exact,
    )
    rng = np.random.default_rng(args.seed)
    matrix = measure_matrix(snap, _parse_measures(args.measures), params, rng)
    matrix_to_csv(matrix, args.output)
    if args.report:
        matrix_report_to_json(matrix, args.report)
    print(f"{snap.n_nodes} entities, {len(matrix.raw)} measures -> {args.output}")
    return 0


def _cmd_roles(args: argparse.Namespace) -> int:
    matrix = matrix_from_csv(args.matrix)
    role_set = load_role_source(args.templates)
    assignments = assign_roles(matrix, role_set, args.threshold, args.hard)
    assignments_to_csv(assignments, args.output)
    if args.json:
        assignments_to_json(assignments, args.json)
    classified = sum(1 for a in assignments if a.role != "Unclassified")
    print(f"{classified}/{len(assignments)} entities classified -> {args.output}")
    return 0


def _group_params(args: argparse.Namespace) -> GroupParams:
    return GroupParams(
        method=GroupMethod(args.method),
        weight_threshold=args.tau,
        k=args.k,
        tiers=TierThresholds(args.weak, args.circumjacent, args.kernel),
    )


def _cmd_groups(args: argparse.Namespace) -> int:
    store = _load_store(args.input)
    snaps = (
        window_series(store, args.width, args.step or args.width)
        if args.width
        else [_full_snapshot(store)]
    )
    params = _group_params(args)
    groups_per_window = [extract_groups(s, params) for s in snaps]
    write_groups_json(snaps, groups_per_window, args.output)
    if args.traces:
        write_traces_csv(groups_per_window, args.traces, args.min_stability)
    total = sum(len(g) for g in groups_per_window)
    print(f"{total} groups over {len(snaps)} windows -> {args.output}")
    return 0


def _cmd_dynamics(args: argparse.Namespace) -> int:
    store = _load_store(args.input)
    snaps = window_series(store, args.width, args.step or args.width)
    if len(snaps) < 2:
        raise SystemExit("dynamics needs at least 2 windows")
    rng = np.random.default_rng(args.seed)
    matrices = [
        measure_matrix(s, _parse_measures(args.measures), rng=rng) for s in snaps
    ]
    report = society_report(snaps, matrices)
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.series:
        from .pipeline import _bulk_series

        params = CusumParams(baseline_windows=args.baseline_windows)
        series = _bulk_series(
            snaps, matrices, _parse_measures(args.measures), params.baseline_windows
        )
        export_series_csv(args.series, series, params)
    print(f"society report over {len(snaps)} windows -> {args.output}")
    return 0


def _blog_documents(posts, comments, unit: str):
    if unit == "author":
        return sorted(aggregate_author_documents(posts, comments).items())
    docs = [(p.post_id, f"{p.title} {p.body}") for p in posts]
    docs.extend((c.comment_id, c.body) for c in comments)
    return docs


def _cmd_blogs(args: argparse.Namespace) -> int:
    posts, comments, report = parse_blog_dump(args.posts, args.comments)
    index = tfidf_index(_blog_documents(posts, comments, args.unit))
    if args.blogs_cmd == "index":
        payload = {
            "unit": args.unit,
            "n_docs": index.n_docs,
            "vectors": {
                doc_id: dict(sorted(vec.weights.items()))
                for doc_id, vec in sorted(index.vectors.items())
            },
        }
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"indexed {index.n_docs} {args.unit} documents -> {args.output}")
        return 0
    for doc_id, sim in similar_documents(index, args.query, args.top):
        print(f"{doc_id}\t{sim:.6f}")
    return 0


def _cmd_profiles(args: argparse.Namespace) -> int:
    records, cells, report = parse_cdr(args.cdr, args.cells)
    if report.rejected:
        print(f"warning: {report.rejected} rejected rows", file=sys.stderr)
    entities = sorted({r.caller for r in records} | {r.callee for r in records})
    profiles = [telecom_profile(records, cells, e) for e in entities]
    profiles_to_csv(profiles, args.output)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump([profile_to_dict(p) for p in profiles], fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"{len(profiles)} profiles -> {args.output}")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    store = _load_store(args.input)
    snap = _full_snapshot(store)
    matrix = matrix_from_csv(args.matrix) if args.matrix else None
    assignments = None
    if args.roles:
        role_set = load_role_source("table1")
        if matrix is None:
            raise SystemExit("--roles needs --matrix")
        assignments = assign_roles(matrix, role_set)
    export_graph(snap, args.output, args.format, assignments, matrix)
    print(f"{snap.n_nodes} nodes, {snap.n_edges} edges -> {args.output}")
    return 0


def _cmd_hist(args: argparse.Namespace) -> int:
    values: list[float] = []
    with open(args.input, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            values.append(float(row[args.column]))
    if args.edges:
        edges = [float(x) for x in args.edges.split(",")]
    elif args.log:
        edges = log_edges(args.low, args.high, args.bins)
    else:
        edges = linear_edges(args.low, args.high, args.bins)
    hist = emit_histogram(values, edges)
    histogram_to_csv(hist, args.output)
    print(
        f"{hist.total} values binned ({hist.underflow} under, "
        f"{hist.overflow} over) -> {args.output}"
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = PipelineConfig.from_json_file(args.config)
    except PipelineConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    result = run_pipeline(config, log=sys.stderr)
    if result.exit_code == 0:
        print(f"ok: artifacts in {result.output_dir}")
    else:
        print(
            f"failed ({result.manifest.get('failure_stage')}): "
            f"{result.manifest.get('error')}",
            file=sys.stderr,
        )
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsna", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tsna {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("ingest", help="normalize input into the interaction CSV")
    p.add_argument("--kind", choices=["telecom", "blog", "generic"], required=True)
    p.add_argument("--input", required=True, help="CDR / posts / interactions file")
    p.add_argument("--cells", help="cell sites CSV (telecom)")
    p.add_argument("--comments", help="comments file (blog)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("measure", help="compute the measure matrix")
    p.add_argument("--input", required=True, help="interaction CSV")
    p.add_argument("--output", required=True, help="matrix CSV")
    p.add_argument("--report", help="convergence report JSON")
    p.add_argument("--measures", help="comma-separated measure names (default all)")
    p.add_argument("--window", help="start:end (default full span)")
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--max-iterations", type=int, default=10_000)
    p.add_argument("--exact", action="store_true", help="force exact betweenness")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("roles", help="assign roles from a measure matrix")
    p.add_argument("--matrix", required=True, help="matrix CSV")
    p.add_argument("--templates", default="table1", help="template file or 'table1'")
    p.add_argument("--threshold", type=float, default=0.75)
    p.add_argument("--hard", action="store_true", help="hard 0/1 band matching")
    p.add_argument("--output", required=True, help="assignment CSV")
    p.add_argument("--json", help="assignment detail JSON")
    p.set_defaults(func=_cmd_roles)

    p = sub.add_parser("groups", help="extract groups per window")
    p.add_argument("--input", required=True, help="interaction CSV")
    p.add_argument("--output", required=True, help="groups JSON")
    p.add_argument("--traces", help="trace CSV")
    p.add_argument("--width", type=int, help="window width (default: one full window)")
    p.add_argument("--step", type=int)
    p.add_argument(
        "--method",
        choices=[m.value for m in GroupMethod],
        default=GroupMethod.THRESHOLD_COMPONENTS.value,
    )
    p.add_argument("--tau", type=float, default=1.0, help="weight threshold")
    p.add_argument("--k", type=int, default=2, help="k-core order")
    p.add_argument("--weak", type=float, default=0.10)
    p.add_argument("--circumjacent", type=float, default=0.25)
    p.add_argument("--kernel", type=float, default=0.50)
    p.add_argument("--min-stability", type=float, default=0.5)
    p.set_defaults(func=_cmd_groups)

    p = sub.add_parser("dynamics", help="society report and CUSUM series")
    p.add_argument("--input", required=True, help="interaction CSV")
    p.add_argument("--output", required=True, help="society JSON")
    p.add_argument("--series", help="series CSV with CUSUM statistics")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--step", type=int)
    p.add_argument("--measures", help="comma-separated measure names")
    p.add_argument("--baseline-windows", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_dynamics)

    p = sub.add_parser("blogs", help="TF-IDF index / similarity over a blog dump")
    bsub = p.add_subparsers(dest="blogs_cmd", required=True)
    for name in ("index", "similar"):
        bp = bsub.add_parser(name)
        bp.add_argument("--posts", required=True)
        bp.add_argument("--comments", required=True)
        bp.add_argument(
            "--unit",
            choices=["document", "author"],
            default="document",
            help="one vector per post/comment, or one per author",
        )
        if name == "index":
            bp.add_argument("--output", required=True, help="index JSON")
        else:
            bp.add_argument("--query", required=True, help="document or author id")
            bp.add_argument("--top", type=int, default=10)
        bp.set_defaults(func=_cmd_blogs)

    p = sub.add_parser("profiles", help="telecom behavior profiles from a CDR file")
    p.add_argument("--cdr", required=True)
    p.add_argument("--cells")
    p.add_argument("--output", required=True, help="profile CSV")
    p.add_argument("--json", help="profile JSON mirror")
    p.set_defaults(func=_cmd_profiles)

    p = sub.add_parser("export", help="export the interaction graph")
    p.add_argument("--input", required=True, help="interaction CSV")
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=["graphml", "dot", "csv"], required=True)
    p.add_argument("--matrix", help="matrix CSV for node attributes")
    p.add_argument("--roles", action="store_true", help="attach table1 role labels")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("hist", help="histogram one CSV column")
    p.add_argument("--input", required=True)
    p.add_argument("--column", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--low", type=float, default=0.0)
    p.add_argument("--high", type=float, default=1.0)
    p.add_argument("--log", action="store_true")
    p.add_argument("--edges", help="explicit comma-separated edges")
    p.set_defaults(func=_cmd_hist)

    p = sub.add_parser("run", help="run the whole pipeline from a JSON config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
