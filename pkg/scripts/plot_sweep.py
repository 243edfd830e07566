#!/usr/bin/env python3
"""Turn sweep CSV tables into success-probability figures.

Example:

    qdetnet sweep --strategy pgm --n 2,4,6,8,10 --theta 0.02:0.785:40 \
        --probe entangled --out ent.csv
    qdetnet sweep --strategy pgm --n 2,4,6,8,10 --theta 0.02:0.785:40 \
        --probe separable --out sep.csv
    python scripts/plot_sweep.py ent.csv sep.csv -o success.png

One curve per (strategy, N) pair, success probability against the phase.
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        yield from csv.DictReader(fh)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv_paths", nargs="+", help="sweep CSV files")
    parser.add_argument("-o", "--output", default="sweep.png")
    parser.add_argument("--column", default="closed_form_success",
                        help="which numeric column to plot")
    args = parser.parse_args()

    curves = defaultdict(list)
    for path in args.csv_paths:
        for row in load_rows(path):
            key = f"{row['strategy']} N={row['N']}"
            curves[key].append((float(row["theta"]), float(row[args.column])))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key in sorted(curves):
        points = sorted(curves[key])
        ax.plot([p[0] for p in points], [p[1] for p in points], label=key)
    ax.set_xlabel(r"interaction phase $\theta$ (rad)")
    ax.set_ylabel(args.column.replace("_", " "))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output} ({len(curves)} curves)")


if __name__ == "__main__":
    main()
