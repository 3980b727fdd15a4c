"""Plot mean Q (and mining time) per parameter value from sweep CSVs.

Needs matplotlib, which is not a package dependency.

    python scripts/plot_sweep.py results/sweeps/*.csv --out results/sweeps.png
"""

import argparse
import csv
import statistics
import sys
from collections import defaultdict
from pathlib import Path


def load(path):
    by_value = defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            by_value[float(row["value"])].append((float(row["q"]), float(row["mine_seconds"])))
    param = Path(path).stem
    xs = sorted(by_value)
    q = [statistics.mean(r[0] for r in by_value[x]) for x in xs]
    secs = [statistics.mean(r[1] for r in by_value[x]) for x in xs]
    return param, xs, q, secs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", nargs="+")
    ap.add_argument("--out", default="sweeps.png")
    ns = ap.parse_args(argv)
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is required for plotting", file=sys.stderr)
        return 1

    panels = [load(p) for p in ns.csv]
    fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3), squeeze=False)
    for ax, (param, xs, q, secs) in zip(axes[0], panels):
        ax.plot(xs, q, "o-")
        ax.set_xlabel(param)
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("Q")
        if param == "n":
            twin = ax.twinx()
            twin.plot(xs, secs, "s--", color="gray")
            twin.set_ylabel("mine seconds")
    fig.tight_layout()
    fig.savefig(ns.out, dpi=120)
    print(f"wrote {ns.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
