"""Desk-scale parameter sweeps: vary one benchmark parameter at a time.

Each panel calls ``acmine sweep`` and appends to ``<outdir>/<param>.csv``;
rerunning skips rows that already exist, so an interrupted run can resume.

    python scripts/run_sweep.py --outdir results/sweeps --seeds 3
    python scripts/run_sweep.py --only mu --seeds 5
"""

import argparse
import sys
from pathlib import Path

from acmine.cli import main as acmine

# desk-scale base point; each panel varies one parameter around it
BASE = ["--n", "1000", "--d-avg", "20", "--d-max", "50", "--c-min", "20", "--c-max", "40",
        "--r", "20", "--t", "6", "--p", "0.9", "--mu", "0.2"]

PANELS = {
    "n": "500,1000,2000,4000",
    "mu": "0.1,0.2,0.3,0.4,0.5",
    "c_min": "10,20,30",
    "r": "10,20,40",
    "t": "2,4,6,8",
    "p": "0.5,0.7,0.9,1.0",
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="results/sweeps")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--pi", default="10", help="backbone threshold in percent (see README)")
    ap.add_argument("--only", choices=sorted(PANELS), action="append")
    ns = ap.parse_args(argv)

    out = Path(ns.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for param in ns.only or PANELS:
        base = list(BASE)
        if param == "c_min":
            # let c_max follow 2 * c_min
            i = base.index("--c-max")
            del base[i:i + 2]
        code = acmine(["sweep", "--param", param, "--values", PANELS[param], "--seeds", str(ns.seeds),
                       "--pi", ns.pi, *base, "--out", str(out / f"{param}.csv")])
        if code not in (0, 5):
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
