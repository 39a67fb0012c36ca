#!/usr/bin/env python3
"""Generate the surveillance-shaped synthetic CDR corpus as CSV files.

Defaults reproduce the standard experiment size: 133,197 records among
7,757 interlocutors with 200 cell sites over 120 days.
"""

import argparse
from pathlib import Path

from tsna.synth import synthetic_cdr, write_cdr_csv, write_cells_csv


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=123)
    parser.add_argument("--entities", type=int, default=7_757)
    parser.add_argument("--records", type=int, default=133_197)
    parser.add_argument("--days", type=int, default=120)
    parser.add_argument("--out", type=Path, default=Path("data"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    records, cells = synthetic_cdr(
        seed=args.seed,
        n_entities=args.entities,
        n_records=args.records,
        days=args.days,
    )
    cdr_path = args.out / "cdr.csv"
    cells_path = args.out / "cells.csv"
    write_cdr_csv(records, str(cdr_path))
    write_cells_csv(cells, str(cells_path))
    print(f"wrote {len(records)} records -> {cdr_path}")
    print(f"wrote {len(cells)} cell sites -> {cells_path}")


if __name__ == "__main__":
    main()
