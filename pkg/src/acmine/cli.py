"""Command-line front end: ``gen``, ``mine``, ``eval``, ``sweep`` and ``replay``.

Exit codes: 0 success, 2 configuration error, 3 validation error,
4 I/O error, 5 finished but some local search hit its iteration cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .benchgen import (
    BenchmarkParams,
    GroundTruth,
    InfeasibleParams,
    generate,
    load_ground_truth,
    mixing,
    pick_concerned,
    save_ground_truth,
)
from .evaluation import ground_truth_organization, quality_q
from .graph import GraphFormatError, load_graph, save_graph
from .kernel import KernelConfig, Subspace
from .pipeline import DiversityConfig, Organization, mine
from .search import SearchConfig
from .seeding import SeedingConfig

logger = logging.getLogger("acmine")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4
EXIT_CAPPED = 5

EDGES, NODES, SCHEMA, TRUTH = "edges.txt", "nodes.tsv", "schema.json", "truth.txt"
SWEEPABLE = ("n", "mu", "c_min", "r", "t", "p")
SWEEP_FIELDS = ["param", "value", "seed", "q", "n_truth", "n_detected", "m", "mixing", "mine_seconds"]


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    argv: list[str]
    paths: dict = field(default_factory=dict)
    concerned: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)
    parallel: int = 0
    cwd: str = field(default_factory=os.getcwd)  # relative paths in argv resolve against this


# ---------------------------------------------------------------- arguments

def _bench_args(p: argparse.ArgumentParser) -> None:
    d = BenchmarkParams()
    g = p.add_argument_group("benchmark")
    g.add_argument("--n", type=int, default=d.n)
    g.add_argument("--tau1", type=float, default=d.tau1)
    g.add_argument("--tau2", type=float, default=d.tau2)
    g.add_argument("--d-avg", type=float, default=d.d_avg)
    g.add_argument("--d-max", type=int, default=d.d_max)
    g.add_argument("--c-min", type=int, default=d.c_min)
    g.add_argument("--c-max", type=int, default=None, help="default: 2 * c-min")
    g.add_argument("--mu", type=float, default=d.mu)
    g.add_argument("--r", type=int, default=d.r)
    g.add_argument("--t", type=int, default=d.t)
    g.add_argument("--p", type=float, default=d.p)
    g.add_argument("--type", default=d.type, choices=["numerical", "binary", "categorical"])
    g.add_argument("--noise", default=d.noise, choices=["node", "entry"])
    g.add_argument("--delta", type=float, default=d.delta)
    g.add_argument("--seed", type=int, default=0, help="root random seed")


def _mine_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("mining")
    g.add_argument("--pi", type=float, default=SeedingConfig.pi)
    g.add_argument("--beta-c", type=float, default=DiversityConfig.beta_c)
    g.add_argument("--beta-d", type=float, default=DiversityConfig.beta_d)
    g.add_argument("--theta", type=float, default=KernelConfig.theta)
    g.add_argument("--min-seed-size", type=int, default=SeedingConfig.min_seed_size)
    g.add_argument("--max-alternations", type=int, default=SearchConfig.max_alternations)
    g.add_argument("--parallel", type=int, default=0, metavar="WORKERS",
                   help="converge seeds in WORKERS processes (disables visited-node skipping)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="acmine", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an attributed benchmark")
    _bench_args(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("mine", help="mine a community organization")
    p.add_argument("--graph", help="directory holding edges.txt, nodes.tsv and schema.json")
    p.add_argument("--edges")
    p.add_argument("--nodes")
    p.add_argument("--schema")
    p.add_argument("--concerned", required=True, help="comma-separated dimension names or indices")
    p.add_argument("--seed", type=int, default=0)
    _mine_args(p)
    p.add_argument("--out", required=True, help="organization file (JSON lines)")
    p.add_argument("--manifest", help="run manifest path (default: <out>.manifest.json)")

    p = sub.add_parser("eval", help="score an organization against a ground truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--org", required=True)
    p.add_argument("--concerned", help="dimension indices; default: taken from the mine manifest")
    p.add_argument("--manifest", help="mine manifest to read concerned dimensions from")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--csv", help="append a CSV row here")
    p.add_argument("--run-manifest", help="where to record this run (default: <org>.eval.manifest.json)")

    p = sub.add_parser("sweep", help="gen -> mine -> eval over one varied parameter")
    p.add_argument("--param", required=True, choices=SWEEPABLE)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--seeds", type=int, default=3, help="repetitions per value (seeds 0..k-1 offset by --seed)")
    p.add_argument("--concerned-k", type=int, default=2)
    _bench_args(p)
    _mine_args(p)
    p.add_argument("--out", required=True, help="CSV file; existing rows are kept and skipped")

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest")
    return ap


# ---------------------------------------------------------------- helpers

def _params(ns, seed=None, **override) -> BenchmarkParams:
    kw = dict(
        n=ns.n, tau1=ns.tau1, tau2=ns.tau2, d_avg=ns.d_avg, d_max=ns.d_max, c_min=ns.c_min,
        c_max=ns.c_max, mu=ns.mu, r=ns.r, t=ns.t, p=ns.p, type=ns.type, noise=ns.noise,
        delta=ns.delta, rng_seed=ns.seed if seed is None else seed,
    )
    kw.update(override)
    return BenchmarkParams(**kw)


def _mine_configs(ns, seed: int):
    try:
        return (
            DiversityConfig(ns.beta_c, ns.beta_d),
            SeedingConfig(ns.pi, ns.min_seed_size, seed),
            KernelConfig(ns.theta),
            SearchConfig(max_alternations=ns.max_alternations),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_concerned(schema, text: str) -> Subspace:
    dims = []
    for tok in [t.strip() for t in text.split(",") if t.strip()]:
        try:
            dims.append(schema.index(tok))
        except KeyError:
            raise ConfigError(f"unknown concerned attribute {tok!r}") from None
    if not dims:
        raise ConfigError("no concerned attributes given")
    return Subspace(dims)


def organization_lines(org: Organization, schema) -> list[str]:
    names = schema.names
    return [
        json.dumps(
            {
                "members": sorted(p.community),
                "subspace": [names[i] for i in p.subspace.dims],
                "dims": list(p.subspace.dims),
                "fitness": p.fitness,
            },
            sort_keys=True,
        )
        for p in org.pairs
    ]


def read_organization(path) -> list[dict]:
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"organization line {lineno}: {exc}") from exc
    return out


def _write_manifest(path, cfg: RunConfig, extra: dict) -> None:
    # wall_seconds is the only field that differs between identical reruns
    body = {"acmine_version": __version__, "config": asdict(cfg)}
    body.update(extra)
    Path(path).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _graph_paths(ns) -> tuple[str, str, str]:
    if ns.graph:
        base = Path(ns.graph)
        return str(base / EDGES), str(base / NODES), str(base / SCHEMA)
    if not (ns.edges and ns.nodes and ns.schema):
        raise ConfigError("give --graph DIR or all of --edges, --nodes, --schema")
    return ns.edges, ns.nodes, ns.schema


# ---------------------------------------------------------------- commands

def cmd_gen(ns, argv) -> int:
    params = _params(ns)
    params.validate()
    t0 = time.perf_counter()
    graph, truth = generate(params)
    elapsed = time.perf_counter() - t0
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    save_graph(graph, out / EDGES, out / NODES, out / SCHEMA)
    save_ground_truth(truth, out / TRUTH)
    cfg = RunConfig("gen", argv, {"out": str(out)}, settings={"benchmark": params.to_json()})
    _write_manifest(out / "manifest.json", cfg, {
        "n": graph.n, "m": graph.m, "communities": len(truth.communities),
        "mixing": mixing(graph, truth), "wall_seconds": elapsed,
    })
    print(f"wrote benchmark n={graph.n} m={graph.m} communities={len(truth.communities)} "
          f"to {out} in {elapsed:.2f}s")
    return EXIT_OK


def cmd_mine(ns, argv) -> int:
    edges, nodes, schema_path = _graph_paths(ns)
    diversity, seeding, kernel, search = _mine_configs(ns, ns.seed)
    graph, report = load_graph(edges, nodes, schema_path)
    concerned = _resolve_concerned(graph.schema, ns.concerned)
    t0 = time.perf_counter()
    org = mine(graph, concerned, diversity, seeding, kernel, search, workers=ns.parallel)
    elapsed = time.perf_counter() - t0
    out = Path(ns.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = organization_lines(org, graph.schema)
    out.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    cfg = RunConfig(
        "mine", argv, {"edges": edges, "nodes": nodes, "schema": schema_path, "out": str(out)},
        concerned=list(concerned.dims), settings=org.provenance, parallel=ns.parallel,
    )
    manifest = ns.manifest or str(out) + ".manifest.json"
    _write_manifest(manifest, cfg, {
        "concerned_names": [graph.schema.names[i] for i in concerned.dims],
        "stats": asdict(org.stats),
        "dropped_self_loops": report.self_loops,
        "dropped_duplicates": report.duplicates,
        "wall_seconds": elapsed,
    })
    print(f"mined {len(org)} pair(s) from {org.stats.seeds} seed(s) in {elapsed:.2f}s -> {out}")
    if org.stats.capped:
        logger.warning("%d local search(es) hit the iteration cap", org.stats.capped)
        return EXIT_CAPPED
    return EXIT_OK


def cmd_eval(ns, argv) -> int:
    truth = load_ground_truth(ns.truth)
    if ns.concerned is not None:
        try:
            dims = [int(x) for x in ns.concerned.split(",") if x.strip()]
        except ValueError:
            raise ConfigError("--concerned for eval takes dimension indices") from None
    elif ns.manifest:
        dims = json.loads(Path(ns.manifest).read_text(encoding="utf-8"))["config"]["concerned"]
    else:
        default = Path(ns.org + ".manifest.json")
        if not default.exists():
            raise ConfigError("give --concerned or --manifest")
        dims = json.loads(default.read_text(encoding="utf-8"))["config"]["concerned"]
    truth_org = ground_truth_organization(truth, dims)
    if not truth_org:
        raise ConfigError(f"no ground-truth community has a subspace containing {dims}")
    records = read_organization(ns.org)
    detected = [r["members"] for r in records]
    subs = [s.dims for c, s in zip(truth.communities, truth.subspaces) if set(dims) <= set(s.dims)]
    rep = quality_q(truth_org, detected, subs, [r.get("dims", []) for r in records])
    if ns.report:
        Path(ns.report).write_text(rep.to_json() + "\n", encoding="utf-8")
    if ns.csv:
        path = Path(ns.csv)
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a", encoding="utf-8") as fh:
            if new:
                fh.write("truth,org,q,n_truth,n_detected\n")
            fh.write(rep.csv_row(truth=ns.truth, org=ns.org))
    cfg = RunConfig("eval", argv, {"truth": ns.truth, "org": ns.org, "report": ns.report, "csv": ns.csv},
                    concerned=list(dims))
    _write_manifest(ns.run_manifest or ns.org + ".eval.manifest.json", cfg,
                    {"q": rep.q, "n_truth": rep.n_truth, "n_detected": rep.n_detected})
    print(f"Q={rep.q}")
    return EXIT_OK


def _sweep_value(param: str, tok: str):
    return int(tok) if param in ("n", "c_min", "r", "t") else float(tok)


def run_point(params: BenchmarkParams, ns, k: int) -> dict:
    """One gen -> mine -> eval round; returns a sweep CSV row (minus param/value)."""
    graph, truth = generate(params)
    concerned = pick_concerned(truth, k, params.rng_seed)
    diversity, seeding, kernel, search = _mine_configs(ns, params.rng_seed)
    t0 = time.perf_counter()
    org = mine(graph, concerned, diversity, seeding, kernel, search, workers=ns.parallel)
    elapsed = time.perf_counter() - t0
    rep = quality_q(ground_truth_organization(truth, concerned), org.communities())
    return {
        "seed": params.rng_seed, "q": rep.q, "n_truth": rep.n_truth, "n_detected": rep.n_detected,
        "m": graph.m, "mixing": mixing(graph, truth), "mine_seconds": round(elapsed, 3),
    }


def cmd_sweep(ns, argv) -> int:
    values = [_sweep_value(ns.param, tok) for tok in ns.values.split(",") if tok.strip()]
    out = Path(ns.out)
    done: set[tuple[str, str]] = set()
    if out.exists() and out.stat().st_size:
        with open(out, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                done.add((row["value"], row["seed"]))
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            csv.DictWriter(fh, SWEEP_FIELDS, lineterminator="\n").writeheader()
    for value in values:
        override = {ns.param: value}
        if ns.param == "c_min" and ns.c_max is None:
            override["c_max"] = 2 * value
        for rep in range(ns.seeds):
            seed = ns.seed + rep
            if (str(value), str(seed)) in done:
                continue
            params = _params(ns, seed=seed, **override)
            params.validate()
            row = {"param": ns.param, "value": value, **run_point(params, ns, ns.concerned_k)}
            with open(out, "a", newline="", encoding="utf-8") as fh:
                csv.DictWriter(fh, SWEEP_FIELDS, lineterminator="\n").writerow(row)
            print(f"{ns.param}={value} seed={seed} Q={row['q']:.4f} ({row['mine_seconds']}s)")
    cfg = RunConfig("sweep", argv, {"out": str(out)}, settings={"param": ns.param, "values": values})
    _write_manifest(str(out) + ".manifest.json", cfg, {})
    return EXIT_OK


def cmd_replay(ns, argv) -> int:
    try:
        config = json.loads(Path(ns.manifest).read_text(encoding="utf-8"))["config"]
        recorded, cwd = config["argv"], config.get("cwd", os.getcwd())
    except (KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"not a run manifest: {ns.manifest}") from exc
    if recorded and recorded[0] == "replay":
        raise ConfigError("refusing to replay a replay")
    here = os.getcwd()
    os.chdir(cwd)
    try:
        return main(recorded)
    finally:
        os.chdir(here)


COMMANDS = {"gen": cmd_gen, "mine": cmd_mine, "eval": cmd_eval, "sweep": cmd_sweep, "replay": cmd_replay}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[ns.command](ns, argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleParams, GraphFormatError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
