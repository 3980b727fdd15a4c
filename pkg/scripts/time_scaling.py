"""Mining wall time against n at fixed density (median of repeated runs).

    python scripts/time_scaling.py --sizes 1000,2000,4000,8000 --repeats 3
"""

import argparse
import statistics
import sys
import time

from acmine.benchgen import BenchmarkParams, generate, pick_concerned
from acmine.pipeline import mine
from acmine.seeding import SeedingConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,2000,4000")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--pi", type=float, default=10.0)
    ns = ap.parse_args(argv)

    print("n,m,median_seconds,ratio")
    prev = None
    for n in (int(x) for x in ns.sizes.split(",")):
        times, m = [], 0
        for seed in range(ns.repeats):
            params = BenchmarkParams(n=n, d_avg=20, d_max=50, c_min=20, c_max=40, rng_seed=seed)
            g, gt = generate(params)
            concerned = pick_concerned(gt, 2, seed)
            t0 = time.perf_counter()
            mine(g, concerned, seeding=SeedingConfig(pi=ns.pi, rng_seed=seed))
            times.append(time.perf_counter() - t0)
            m = g.m
        med = statistics.median(times)
        ratio = "" if prev is None else f"{med / prev:.2f}"
        print(f"{n},{m},{med:.3f},{ratio}")
        prev = med
    return 0


if __name__ == "__main__":
    sys.exit(main())
