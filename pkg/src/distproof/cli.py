"""Command-line entry point: ``distproof demo | bitchange | bench``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import random
import sys
import time
from dataclasses import fields
from pathlib import Path

from .cluster import dist_commit, dist_sumcheck, plan_topology, split_pairs
from .distinct import CSV_NAME, bitchange_experiment
from .field import get_field
from .mle import MultilinearTable
from .pipeline import ConfigError, RunConfig, run_epoch
from .transcript import Transcript

LOG_ENV = "DISTPROOF_LOG"
log = logging.getLogger("distproof")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _setup_logging() -> None:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    """Flags win over the config file, which wins over the defaults."""
    merged = _load_config(args.config)
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            merged[f.name] = value
    if "tamper" in merged:
        merged["tamper"] = tuple(merged["tamper"])
    return RunConfig(**merged).validate()


def cmd_demo(args: argparse.Namespace) -> int:
    try:
        cfg = build_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.report is None:
        cfg.report = "epoch-report.json"
    report = run_epoch(cfg)
    for block in report.accept_flags:
        failed = [k for k, v in block["accept"].items() if not v]
        log.info("block %d: %s", block["block"], "ok" if not failed else "FAILED " + ",".join(failed))
    print(f"report: {cfg.report}")
    print(f"final H_cur: {report.final_h_cur}")
    print(f"w2w bytes: {report.traffic['w2w']}")
    if not report.all_accepted:
        print("verification failed", file=sys.stderr)
        return EXIT_FAIL
    print("all blocks accepted")
    return EXIT_OK


def cmd_bitchange(args: argparse.Namespace) -> int:
    if args.count < 1:
        print("config error: --count must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        field = get_field(args.field)
    except (KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = bitchange_experiment(args.count, field)
    path = result.write_csv(args.out)
    probs = result.probabilities
    print(f"wrote {path} ({len(probs)} bits, count {args.count})")
    body = probs[:-2]
    if len(body):
        print(f"bits 0..{len(probs) - 3}: min {body.min():.4f} max {body.max():.4f}")
    return EXIT_OK


def bench_once(n_workers: int, num_vars: int, field, seed: int) -> float:
    rng = random.Random(seed)
    size = 1 << num_vars
    f = MultilinearTable(field, tuple(rng.randrange(field.modulus) for _ in range(size)))
    g = MultilinearTable(field, tuple(rng.randrange(field.modulus) for _ in range(size)))
    topo = plan_topology(n_workers)
    t0 = time.perf_counter()
    shares = split_pairs([(f, g)], n_workers)
    dist_commit(topo, [s.pairs[0][0] for s in shares], field)
    dist_sumcheck(topo, shares, Transcript(field, "bench"))
    return time.perf_counter() - t0


def cmd_bench(args: argparse.Namespace) -> int:
    workers = args.workers or []
    if not workers:
        print("config error: need at least one worker count", file=sys.stderr)
        return EXIT_CONFIG
    try:
        field = get_field(args.field)
        for n in workers:
            plan_topology(n)
            if n > (1 << args.vars):
                raise ConfigError(f"{n} workers exceed the table size 2^{args.vars}")
    except (KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = [(n, bench_once(n, args.vars, field, args.seed)) for n in workers]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["numval", "time"])
        for n, t in rows:
            w.writerow([n, f"{t:.6f}"])
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


def _worker_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a worker list: {text!r}") from exc


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distproof", description="Distributed proof-generation simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo", help="run one synthetic epoch and verify every block")
    demo.add_argument("--config", help="JSON file with RunConfig keys (flags override it)")
    demo.add_argument("--field", help="bn254, goldilocks or toy97")
    demo.add_argument("--validators", type=int, help="validators per block")
    demo.add_argument("--blocks", type=int, help="blocks in the epoch")
    demo.add_argument("--depth", type=int, help="beacon tree depth")
    demo.add_argument("--workers", type=int, help="number of workers N (power of two)")
    demo.add_argument("--clusters", type=int, help="number of clusters K (default: planned from N)")
    demo.add_argument("--seed", type=int)
    demo.add_argument("--queries", type=int, help="column spot checks per opening")
    demo.add_argument("--tamper", action="append", help="tamper hook, optionally NAME@BLOCK (repeatable)")
    demo.add_argument("--report", help="report path (default epoch-report.json)")
    demo.add_argument("--state-file", dest="state_file", help="file carrying the running index hash")
    demo.add_argument("--timings", action="store_true", default=None, help="record wall-clock timings")
    demo.set_defaults(func=cmd_demo)

    bc = sub.add_parser("bitchange", help="bit-change probabilities of consecutive index hashes")
    bc.add_argument("--count", type=int, default=1_000_000)
    bc.add_argument("--field", default="bn254")
    bc.add_argument("--out", default=CSV_NAME, help="CSV path or directory")
    bc.set_defaults(func=cmd_bitchange)

    bench = sub.add_parser("bench", help="time distributed commit plus sumcheck across worker counts")
    bench.add_argument("--workers", type=_worker_list, default=[1, 2, 4], help='e.g. "1,2,4"')
    bench.add_argument("--vars", type=int, default=12, help="log2 of the table size")
    bench.add_argument("--field", default="bn254")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", default="bench.csv")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
