"""Command line entry point: ``netmpg run | eval | check``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import checks
from .harness import OUTPUT_ENV, ConfigError, evaluate_gaps, load_checkpoint, run_batch, validate_config


def parse_seeds(text):
    """``"0..9"`` (inclusive range) or a comma-separated list."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s.strip()]


_OVERRIDES = {
    "M": ("actor", "M"), "T": ("actor", "T"), "H": ("actor", "H"), "beta": ("actor", "beta"),
    "beta_mode": ("actor", "beta_mode"), "snapshot_every": ("actor", "snapshot_every"),
    "K": ("critic", "K"), "alpha": ("critic", "alpha"), "lam": ("critic", "lambda"),
    "eps": ("critic", "eps"), "kappa_c": ("critic", "kappa_c"), "stride": ("evaluation", "stride"),
}


def _build_parser():
    p = argparse.ArgumentParser(prog="netmpg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config for one or more seeds")
    run.add_argument("--config", required=True)
    run.add_argument("--seeds", default=None, help='e.g. "0..9" or "0,3,5"')
    run.add_argument("--out", default=None, help=f"output root (default ${OUTPUT_ENV} or ./runs)")
    for flag, typ in (("--M", int), ("--T", int), ("--H", int), ("--beta", float), ("--K", int),
                      ("--alpha", float), ("--eps", float), ("--kappa-c", int), ("--snapshot-every", int),
                      ("--stride", int)):
        run.add_argument(flag, type=typ, default=None)
    run.add_argument("--lambda", dest="lam", type=float, default=None)
    run.add_argument("--beta-mode", choices=("paper-exact", "paper-approx", "literal"), default=None)

    ev = sub.add_parser("eval", help="NE-gaps of a saved policy checkpoint")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--restarts", type=int, default=3)
    ev.add_argument("--steps", type=int, default=200)
    ev.add_argument("--method", choices=("local", "upper"), default="local")
    ev.add_argument("--seed", type=int, default=0)

    ch = sub.add_parser("check", help="run an invariant suite")
    ch.add_argument("--suite", required=True, help="suite name or 'all': " + ", ".join(checks.SUITES))
    return p


def _cmd_run(args):
    raw = json.loads(Path(args.config).read_text())
    for name, (section, key) in _OVERRIDES.items():
        value = getattr(args, name, None)
        if value is not None:
            raw.setdefault(section, {})[key] = value
    cfg = validate_config(raw)
    seeds = parse_seeds(args.seeds) if args.seeds else cfg["seeds"]
    root, dirs = run_batch(cfg, seeds, args.out)
    failed = []
    for d in dirs:
        meta = json.loads((d / "metadata.json").read_text())
        print(json.dumps({"run": str(d), "final_global_gap": meta["final_global_gap"], "error": meta["error"]}))
        if meta["error"]:
            failed.append(str(d))
    return 1 if failed else 0


def _cmd_eval(args):
    game, m, theta = load_checkpoint(args.checkpoint)
    report = evaluate_gaps(game, theta, {"restarts": args.restarts, "steps": args.steps, "method": args.method},
                           np.random.default_rng(args.seed))
    print(json.dumps({"m": m, "ne_gap": report.gaps.tolist(), "raw": report.raw.tolist(),
                      "j": report.J.tolist(), "global_gap": report.global_gap}))
    return 0


def _cmd_check(args):
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        result = checks.run_suite(name)
        ok &= result["passed"]
        print(json.dumps(result, default=float))
    return 0 if ok else 1


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return {"run": _cmd_run, "eval": _cmd_eval, "check": _cmd_check}[args.command](args)
    except (ConfigError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
