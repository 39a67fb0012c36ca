#!/usr/bin/env python3
"""Planted-role recovery experiment.

Plants 5 Organiser and 6 Receiver measure profiles mid-band into a
1000-entity background and reports recall and candidate precision for
several background seeds.
"""

import argparse

from tsna.roles import assign_roles, table1_roles
from tsna.synth import planted_role_matrix


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--background", type=int, default=1000)
    parser.add_argument("--threshold", type=float, default=0.75)
    args = parser.parse_args()

    roles = table1_roles()
    print("seed  recall  candidates  precision")
    for seed in range(args.seeds):
        matrix, truth = planted_role_matrix(seed=seed, n_background=args.background)
        assignments = assign_roles(matrix, roles, threshold=args.threshold)
        by_entity = {a.entity: a.role for a in assignments}
        recall = sum(1 for e, r in truth.items() if by_entity[e] == r)
        candidates = [
            a.entity for a in assignments if a.role in ("Organiser", "Receiver")
        ]
        precision = len(set(candidates) & set(truth)) / max(len(candidates), 1)
        print(
            f"{seed:4d}  {recall:2d}/11  {len(candidates):10d}  {precision:9.2f}"
        )


if __name__ == "__main__":
    main()
