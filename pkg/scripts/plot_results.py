#!/usr/bin/env python3
"""Quick look at a results CSV: one line per scheme over the sweep.

Usage: plot_results.py results.csv [out.png]
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__.strip())
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.rsplit(".", 1)[0] + ".png"
    series = defaultdict(list)
    with open(path) as fh:
        for row in csv.DictReader(fh):
            series[row["scheme"]].append(
                (float(row["sweep"]), float(row["mean_rate"]), float(row["std_rate"]))
            )
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme, points in sorted(series.items()):
        points.sort()
        xs, ys, errs = zip(*points)
        ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=2, label=scheme)
    ax.set_xlabel("sweep value")
    ax.set_ylabel("mean sum secrecy rate (bits/s/Hz)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
