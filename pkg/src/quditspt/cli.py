"""Command-line front end: percolation sweeps, verification suites and reductions.

Exit codes: 0 success, 1 a verification check failed, 2 configuration error,
3 stochastic failure (no grid found in the sampled instance).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .core import QuditError, as_dim

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_STOCHASTIC = 0, 1, 2, 3
CSV_HEADER = ["kind", "d", "L", "trials", "seed", "delete_p", "prob", "stderr"]
LATTICES = ("honeycomb", "square")
VERIFY_MAX_DIM = 3**10  # oracle budget: ten qutrits


@dataclass
class RunConfig:
    subcommand: str
    d: int = 3
    k: int = 1
    lattice: str = "honeycomb"
    L: list = field(default_factory=lambda: [10])
    trials: int = 10000
    seed: int = 0
    delete_p: list = field(default_factory=lambda: [0.0])
    out: str | None = None
    format: str = "csv"
    suite: str = "all"
    sets: int = 3
    graphs: int = 200
    patterns: int = 50
    deletions: int = 50
    w: int = 2
    block: int | None = None
    verify: str = "auto"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)


def parse_l_range(text: str) -> list[int]:
    """'5..40' (step 5), '5..40:1' or '10,20,30'."""
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (int(t) for t in span.split(".."))
            step_n = int(step) if step else 5
            if step_n < 1 or lo > hi:
                raise ValueError
            return list(range(lo, hi + 1, step_n))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad L range {text!r}; use 5..40[:step] or 10,20") from None


def parse_p_grid(text: str) -> list[float]:
    """'0:0.5:0.02' (inclusive) or '0,0.1,0.2'."""
    try:
        if ":" in text:
            lo, hi, step = (float(t) for t in text.split(":"))
            if step <= 0 or lo > hi:
                raise ValueError
            n = int(round((hi - lo) / step))
            return [round(lo + i * step, 12) for i in range(n + 1)]
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad p grid {text!r}; use lo:hi:step or a,b,c") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quditspt", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"quditspt {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p, trials=True):
        p.add_argument("--d", type=int, default=3, help="prime qudit dimension (default 3)")
        p.add_argument("--k", type=int, default=1, help="SPT index k (default 1)")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        p.add_argument("--out", help="output path (default stdout)")
        if trials:
            p.add_argument("--lattice", choices=LATTICES, default="honeycomb",
                           help="honeycomb (triangular SPT) or square (Union-Jack SPT)")

    p = sub.add_parser("percolate", help="spanning probability against L")
    common(p)
    p.add_argument("--L", type=parse_l_range, default=[10], help="5..40[:step] or list")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--delete-p", type=float, default=0.0, help="edge deletion probability")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("stability", help="spanning probability against edge deletion")
    common(p)
    p.add_argument("--L", type=parse_l_range, default=[10, 20, 30])
    p.add_argument("--p-grid", type=parse_p_grid, default=parse_p_grid("0:0.5:0.02"))
    p.add_argument("--patterns", type=int, default=50)
    p.add_argument("--deletions", type=int, default=50)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("verify", help="oracle verification suites")
    common(p, trials=False)
    p.add_argument("--suite", choices=("rules", "symmetry", "gates", "ddw", "all"), default="all")
    p.add_argument("--sets", type=int, default=3, help="random weight sets per gate (default 3)")
    p.add_argument("--graphs", type=int, default=200, help="host graphs for the rules suite")

    p = sub.add_parser("reduce", help="reduce a sampled instance to a square grid")
    common(p)
    p.add_argument("--L", type=int, default=10)
    p.add_argument("--w", type=int, default=2, help="target grid side (default 2)")
    p.add_argument("--block", type=int, help="block height in lattice rows (default L/5)")
    p.add_argument("--verify", choices=("auto", "on", "off"), default="auto",
                   help="oracle checks; auto runs them when d^(w*w) <= 3^10")
    return ap


def to_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(ns.subcommand, d=ns.d, k=ns.k, seed=ns.seed, out=ns.out)
    for name in ("lattice", "trials", "format", "suite", "sets", "graphs", "patterns",
                 "deletions", "w", "block", "verify"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if hasattr(ns, "L"):
        cfg.L = ns.L if isinstance(ns.L, list) else [ns.L]
    if hasattr(ns, "delete_p"):
        cfg.delete_p = [ns.delete_p]
    if hasattr(ns, "p_grid"):
        cfg.delete_p = ns.p_grid
    return cfg


def validate(cfg: RunConfig) -> None:
    dim = as_dim(cfg.d)
    if cfg.k % dim.d == 0:
        raise QuditError("k must be nonzero mod d")
    if cfg.subcommand in ("percolate", "stability"):
        if min(cfg.L) < 1:
            raise QuditError("L must be positive")
        if any(not 0 <= p <= 1 for p in cfg.delete_p):
            raise QuditError("deletion probabilities must lie in [0, 1]")
        if min(cfg.trials, cfg.patterns, cfg.deletions) < 1:
            raise QuditError("trial counts must be positive")
    if cfg.subcommand == "verify" and cfg.suite in ("rules", "gates", "all"):
        dim.require_odd(f"the {cfg.suite} suite")
    if cfg.subcommand == "verify" and cfg.suite == "ddw" and dim.d > 3:
        raise QuditError("the ddw patches are sized for d <= 3")
    if cfg.subcommand == "reduce":
        dim.require_odd("reduction")
        if cfg.w < 2:
            raise QuditError("the target grid needs --w >= 2")


def metadata(cfg: RunConfig, schema: str, wall: float) -> dict:
    from .percolation import rng_identity

    return {"schema": schema, "version": __version__, "d": cfg.d, "k": cfg.k, "seed": cfg.seed,
            "rng": rng_identity(cfg.seed), "wall_time_s": wall, "config": cfg.to_dict()}


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_table(cfg: RunConfig, rows: list, schema: str, wall: float, extra: dict) -> None:
    meta = {**metadata(cfg, schema, wall), **extra}
    if cfg.format == "json":
        _emit(cfg, json.dumps({**meta, "rows": rows}, indent=2) + "\n")
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _emit(cfg, buf.getvalue())
    if cfg.out:
        Path(cfg.out + ".json").write_text(json.dumps(meta, indent=2) + "\n")


def cmd_percolate(cfg: RunConfig) -> int:
    from .percolation import TrialPlan, configure_threads, geometry_note, percolation_probability

    t0 = time.perf_counter()
    rows = []
    for L in cfg.L:
        est = percolation_probability(TrialPlan(cfg.d, L, cfg.lattice, cfg.trials, cfg.seed,
                                                cfg.delete_p[0]))
        rows.append({"kind": cfg.lattice, "d": cfg.d, "L": L, "trials": cfg.trials,
                     "seed": cfg.seed, "delete_p": cfg.delete_p[0], "prob": est.prob,
                     "stderr": est.stderr})
    _write_table(cfg, rows, "quditspt.percolate/1", time.perf_counter() - t0,
                 {"threads": configure_threads(), "geometry": geometry_note(cfg.lattice)})
    return EXIT_OK


def cmd_stability(cfg: RunConfig) -> int:
    from .percolation import configure_threads, geometry_note, stability_curve

    t0 = time.perf_counter()
    rows = []
    for L in cfg.L:
        for est in stability_curve(cfg.d, L, cfg.delete_p, cfg.lattice, cfg.patterns,
                                   cfg.deletions, cfg.seed):
            rows.append({"kind": cfg.lattice, "d": cfg.d, "L": L, "trials": est.trials,
                         "seed": cfg.seed, "delete_p": est.meta["delete_p"], "prob": est.prob,
                         "stderr": est.stderr})
    _write_table(cfg, rows, "quditspt.stability/1", time.perf_counter() - t0,
                 {"threads": configure_threads(), "geometry": geometry_note(cfg.lattice),
                  "patterns": cfg.patterns, "deletions": cfg.deletions})
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .suites import SUITES, run_suite

    t0 = time.perf_counter()
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    reports = []
    for name in names:
        if name == "ddw":
            # the domain-wall patches are checked at d = 2 and 3
            dims = sorted({2, cfg.d}) if cfg.d <= 3 else [2, 3]
        else:
            dims = [cfg.d]
        for d in dims:
            rep = run_suite(name, d, cfg.k % d or 1, cfg.seed, cfg.sets, cfg.graphs)
            reports.append(rep)
            print(f"{'PASS' if rep.passed else 'FAIL'} {name} d={d} "
                  f"({rep.wall_time_s:.1f}s)", file=sys.stderr)
    passed = all(r.passed for r in reports)
    first = next((f"{r.suite}: {r.first_failure}" for r in reports if not r.passed), None)
    doc = {**metadata(cfg, "quditspt.verify/1", time.perf_counter() - t0), "passed": passed,
           "first_failure": first, "reports": [r.to_dict() for r in reports]}
    _emit(cfg, json.dumps(doc, indent=2) + "\n")
    if not passed:
        print(f"first failing check: {first}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_reduce(cfg: RunConfig) -> int:
    from .percolation import config_to_graph, rng_from_seed, sample_config
    from .reduction import SUBCRITICAL, check_excerpts, reduce_to_cluster, verify_final

    t0 = time.perf_counter()
    L = cfg.L[0]
    rng = rng_from_seed(cfg.seed)
    g = config_to_graph(sample_config(cfg.d, L, cfg.lattice, rng), cfg.k)
    try:
        red = reduce_to_cluster(g, cfg.w, cfg.block, seed=rng)
    except QuditError as exc:
        if str(exc) != SUBCRITICAL:
            raise
        print(f"subcritical instance: no {cfg.w}x{cfg.w} grid in this sample; "
              f"retry with another --seed or a larger --L", file=sys.stderr)
        return EXIT_STOCHASTIC
    small = cfg.d ** (cfg.w * cfg.w) <= VERIFY_MAX_DIM
    run_checks = cfg.verify == "on" or (cfg.verify == "auto" and small)
    checks = None
    if run_checks:
        ex = check_excerpts(g, red.schedule)
        checks = {"stabilizer_check": verify_final(red), "excerpts_checked": ex.checked,
                  "excerpts_skipped": ex.skipped, "excerpt_min_fidelity": ex.min_fidelity,
                  "excerpt_failures": ex.failures[:5]}
    doc = {**metadata(cfg, "quditspt.reduce/1", time.perf_counter() - t0),
           "L": L, "w": cfg.w, "lattice": cfg.lattice, "steps": len(red.schedule),
           "verification": checks, "reduction": red.to_dict()}
    _emit(cfg, json.dumps(doc, indent=2) + "\n")
    ok = checks is None or (checks["stabilizer_check"] and not checks["excerpt_failures"])
    print(f"reduced to {cfg.w}x{cfg.w} grid in {len(red.schedule)} steps"
          + ("" if checks is None else f"; oracle checks {'passed' if ok else 'FAILED'}"),
          file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAILED


COMMANDS = {"percolate": cmd_percolate, "stability": cmd_stability, "verify": cmd_verify,
            "reduce": cmd_reduce}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = to_config(ns)
    try:
        validate(cfg)
        return COMMANDS[cfg.subcommand](cfg)
    except QuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def run() -> None:
    sys.exit(main())
