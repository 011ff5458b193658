"""Command-line entry point: ``hetnet check|drivers|generate|experiment|schema``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields

from .analyzers import Verdict, check_theorem1
from .drivers import EXHAUSTIVE_LIMIT, minimal_drivers
from .model import DEFAULT_TOL, InvalidSpecError, ToleranceConfig, build_lifted
from .netfile import NetworkFileError, read_network, render_network
from .numerics import KALMAN_MAX_DIM, NumericalError, exact_controllable_dim, kalman_controllable
from .report import (
    CRITERIA,
    EXIT_CONTROLLABLE,
    EXIT_INPUT_ERROR,
    EXIT_NUMERICAL,
    EXIT_UNCONTROLLABLE,
    REPORT_SCHEMA,
    check_document,
    drivers_document,
    dumps,
    render_table,
    run_criteria,
)
from .synth import SynthConfig, parse_hetero, synthesize


class UsageError(ValueError):
    pass


def parse_tol(text: str | None, base: ToleranceConfig) -> ToleranceConfig:
    if not text:
        return base
    known = {f.name for f in fields(ToleranceConfig)}
    overrides = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in known:
            raise UsageError(f"--tol: expected key=value with key in {', '.join(sorted(known))}, got {item!r}")
        try:
            overrides[key] = float(val)
        except ValueError:
            raise UsageError(f"--tol: {key} needs a number, got {val!r}") from None
    try:
        return base.with_overrides(**overrides)
    except ValueError as exc:
        raise UsageError(f"--tol: {exc}") from None


def parse_criteria(values: list[str] | None) -> list[str]:
    names = [c.strip() for v in (values or ["all"]) for c in v.split(",") if c.strip()]
    if "all" in names:
        return ["all"]
    bad = [c for c in names if c not in CRITERIA]
    if bad:
        raise UsageError(f"unknown criterion {bad[0]!r}; choose from {', '.join(CRITERIA)} or all")
    return names


def cmd_check(args) -> int:
    doc = read_network(args.file)
    tol = parse_tol(args.tol, doc.tolerances)
    criteria = parse_criteria(args.criterion)
    t0 = time.perf_counter()
    reports = run_criteria(doc, criteria, tol, kalman_max_dim=args.kalman_max_dim)
    out = check_document(doc, reports, tol, args.file, time.perf_counter() - t0)
    sys.stdout.write(dumps(out) if args.json else render_table(out))
    return out["summary"]["exit_code"]


def cmd_drivers(args) -> int:
    doc = read_network(args.file, require_delta=False)
    tol = parse_tol(args.tol, doc.tolerances)
    spec = doc.general()
    t0 = time.perf_counter()
    try:
        result = minimal_drivers(spec, mode=args.mode, limit=args.limit, tol=tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    # every reported set is re-checked from scratch before anything is printed
    verified = all(
        check_theorem1(spec.with_delta([int(k in s) for k in range(spec.N)]), tol).verdict is Verdict.CONTROLLABLE
        for s in result.minimal_sets
    )
    out = drivers_document(doc, result, args.mode, tol, args.file, verified, time.perf_counter() - t0)
    if args.json:
        sys.stdout.write(dumps(out))
    else:
        label = "exhaustive" if result.exhaustive else "greedy (no optimality claim)"
        print(f"{args.file}: {label} search, {result.evaluated} driver sets evaluated")
        if result.cardinality is None:
            print("no driver set makes the network controllable")
        else:
            print(f"minimum size {result.cardinality}:")
            for s in out["minimal_sets"]:
                print("  {" + ", ".join(map(str, s)) + "}")
        print(f"verified: {'yes' if verified else 'NO'}")
    if not verified:
        return EXIT_NUMERICAL
    return EXIT_CONTROLLABLE if result.cardinality is not None else EXIT_UNCONTROLLABLE


def _synth_config(args) -> SynthConfig:
    try:
        return SynthConfig(kind=args.kind, N=args.N, n=args.n, p=args.p, m=args.m,
                           hetero=parse_hetero(args.hetero), drivers=args.drivers, edge_prob=args.edge_prob)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_generate(args) -> int:
    cfg = _synth_config(args)
    spec = synthesize(cfg, args.seed)
    name = f"{cfg.kind}-N{cfg.N}-n{cfg.n}-{cfg.hetero}-seed{args.seed}"
    sys.stdout.write(render_network(spec, name=name))
    return 0


CSV_FIELDS = ("sample", "seed", "kind", "N", "n", "hetero", "drivers", "verdict", "controllable", "kalman")


def _sample(job):
    """Theorem-1 verdict plus a Kalman re-check on positives.

    The Kalman matrix is badly conditioned for larger lifted systems, so a
    disagreement is referred to exact reachability: ``kalman_rank_loss`` means
    the exact route sides with PBH, ``pbh_mismatch`` that it sides with Kalman.
    """
    cfg, seed, kalman_max_dim = job
    spec = synthesize(cfg, seed)
    rep = check_theorem1(spec)
    ok = rep.verdict is Verdict.CONTROLLABLE
    kal = ""
    if ok:
        lifted = build_lifted(spec)
        dim = lifted.Phi.shape[0]
        if dim > kalman_max_dim:
            kal = "skipped"
        elif kalman_controllable(lifted.Phi, lifted.Psi, DEFAULT_TOL, max_dim=kalman_max_dim)[0]:
            kal = "agree"
        else:
            kal = "kalman_rank_loss" if exact_controllable_dim(lifted.Phi, lifted.Psi) == dim else "pbh_mismatch"
    return rep.verdict.value, ok, kal


def cmd_experiment(args) -> int:
    cfg = _synth_config(args)
    if args.samples < 0:
        raise UsageError(f"--samples must be nonnegative, got {args.samples}")
    if args.jobs < 1:
        raise UsageError(f"--jobs must be at least 1, got {args.jobs}")
    seeds = [args.seed * 1_000_003 + k for k in range(args.samples)]
    jobs = [(cfg, s, args.kalman_max_dim) for s in seeds]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sample, jobs))  # map preserves sample order
    else:
        results = [_sample(j) for j in jobs]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for k, (seed, (verdict, ok, kal)) in enumerate(zip(seeds, results)):
        writer.writerow((k, seed, cfg.kind, cfg.N, cfg.n, str(cfg.hetero), cfg.drivers, verdict, int(ok), kal))
    if results:
        frac = sum(ok for _, ok, _ in results) / len(results)
        print(f"controllable_fraction={frac:.6f} samples={len(results)}", file=sys.stderr)
    lost = sum(kal == "kalman_rank_loss" for _, _, kal in results)
    if lost:
        print(f"note: Kalman rank lost on {lost} positive sample(s); exact reachability confirms PBH", file=sys.stderr)
    if any(kal == "pbh_mismatch" for _, _, kal in results):
        print("error: exact reachability contradicts a positive PBH verdict", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


def cmd_schema(args) -> int:
    sys.stdout.write(json.dumps(REPORT_SCHEMA, indent=2) + "\n")
    return 0


def _add_synth_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", default="chain", help="chain, star, ring or random")
    p.add_argument("--N", type=int, default=3, help="number of nodes")
    p.add_argument("--n", type=int, default=2, help="node state dimension")
    p.add_argument("--p", type=int, default=1, help="node input dimension")
    p.add_argument("--m", type=int, default=1, help="node output dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hetero", default="none", help="none, resample or perturb(eps)")
    p.add_argument("--drivers", type=int, default=1, help="drive the k lowest-index nodes")
    p.add_argument("--edge-prob", type=float, default=0.5, help="edge probability for --kind random")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetnet", description="Controllability analysis of heterogeneous networked systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run controllability criteria on a network file")
    p.add_argument("file")
    p.add_argument("--criterion", action="append", help=f"one of {', '.join(CRITERIA)} or all (repeatable, comma lists ok)")
    p.add_argument("--tol", help="tolerance overrides, e.g. rank_factor=2,zero_vec_tol=1e-9")
    p.add_argument("--json", action="store_true", help="emit the JSON report instead of a table")
    p.add_argument("--kalman-max-dim", type=int, default=KALMAN_MAX_DIM)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("drivers", help="search for minimum driver-node sets")
    p.add_argument("file")
    p.add_argument("--mode", choices=("exhaustive", "greedy"), default="exhaustive")
    p.add_argument("--limit", type=int, default=EXHAUSTIVE_LIMIT, help="largest N allowed for exhaustive search")
    p.add_argument("--tol")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_drivers)

    p = sub.add_parser("generate", help="write a random network file to stdout")
    _add_synth_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", help="controllable fraction over random samples (CSV)")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--kalman-max-dim", type=int, default=KALMAN_MAX_DIM)
    _add_synth_args(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("schema", help="print the JSON schema of --json reports")
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code else 0
    try:
        return args.func(args)
    except (NetworkFileError, InvalidSpecError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (NumericalError, ValueError) as exc:
        # ValueError here comes from numerics on pathological input, not from parsing
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
