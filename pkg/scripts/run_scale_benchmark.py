#!/usr/bin/env python3
"""Time the full pipeline on the standard-size synthetic CDR corpus.

Generates the corpus, runs ingest -> measures (all eight, exact
betweenness) -> table1 roles -> threshold-component groups over 10 windows
-> dynamics, and reports wall time and peak memory against the 60 s / 2 GB
budget.
"""

import argparse
import json
import resource
import sys
import tempfile
import time
from pathlib import Path

from tsna.pipeline import PipelineConfig, run_pipeline
from tsna.synth import synthetic_cdr, write_cdr_csv, write_cells_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--data-seed", type=int, default=123)
    parser.add_argument("--windows", type=int, default=10)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    out = args.out or Path(tempfile.mkdtemp(prefix="tsna-bench-"))
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    records, cells = synthetic_cdr(seed=args.data_seed)
    write_cdr_csv(records, str(out / "cdr.csv"))
    write_cells_csv(cells, str(out / "cells.csv"))
    print(f"generated {len(records)} records in {time.perf_counter() - t0:.1f}s")

    span = max(r.timestamp for r in records) - min(r.timestamp for r in records) + 1
    width = (span + args.windows - 1) // args.windows
    config = PipelineConfig.from_dict(
        {
            "input": {
                "kind": "telecom",
                "cdr": str(out / "cdr.csv"),
                "cells": str(out / "cells.csv"),
            },
            "output_dir": str(out / "artifacts"),
            "seed": args.seed,
            "window": {"width": width, "step": width},
            "groups": {"method": "threshold_components", "weight_threshold": 2},
            "cusum": {"baseline_windows": 5},
        }
    )
    t0 = time.perf_counter()
    result = run_pipeline(config, log=sys.stderr)
    elapsed = time.perf_counter() - t0
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024

    manifest = json.loads((result.output_dir / "manifest.json").read_text())
    print(f"status: {manifest['status']}")
    print(f"artifacts: {len(manifest['artifacts'])} files in {result.output_dir}")
    print(f"wall time: {elapsed:.1f}s (budget 60s)")
    print(f"peak rss: {peak_mb:.0f} MB (budget 2048 MB)")
    within = result.exit_code == 0 and elapsed < 60 and peak_mb < 2048
    print("PASS" if within else "FAIL")
    return 0 if within else 1


if __name__ == "__main__":
    sys.exit(main())
