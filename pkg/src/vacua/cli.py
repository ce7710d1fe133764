"""Command-line interface: ``vacua {solve,vacuum,sweep,plot,validate}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import RunConfig
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    ParameterError,
    ReferenceDegenerateError,
    RegimeError,
    SingularityError,
    WindowError,
)
from .output import emit_csv, emit_svg, write_manifest
from .runner import run_task
from .validation import invariant_checks

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
CONFIG_ERRORS = (ConfigError, ParameterError, DomainError, RegimeError, WindowError)
NUMERIC_ERRORS = (IntegrationError, SingularityError, ConvergenceError, ReferenceDegenerateError, FloatingPointError)


def _add_run_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--system", help="boson, fermion, scalar_frw or constrained_phi")
    p.add_argument("--profile", help="frequency profile for boson runs")
    p.add_argument("--scale-factor", dest="scale_factor", help="step_ramp36 or sinh_gamma")
    for name in ("k", "H", "m", "gamma", "t0", "t1", "anchor", "tol", "r", "delta", "theta0"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--theta-dot0", dest="theta_dot0", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--method")
    p.add_argument("--window", nargs=2, type=float, metavar=("T1", "T2"))
    p.add_argument("--tail", nargs="+", type=float, metavar="T", help="t0 followed by increasing upper limits")
    p.add_argument("--side", choices=("in", "out", "central"))
    p.add_argument("--space", choices=("theta", "sigma", "squeeze", "fermion"))
    p.add_argument("--functional", choices=("slope", "detrended"))
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-evals", dest="max_evals", type=int)
    p.add_argument("--frw-sign", dest="frw_sign", choices=("plus", "minus"))


def build_parser():
    ap = argparse.ArgumentParser(prog="vacua", description="Vacuum states of driven quantum oscillators.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="integrate one mode trajectory to CSV")
    _add_run_flags(p)
    p.add_argument("--out", help="CSV path")
    p.add_argument("--manifest", help="manifest JSON path (default: <out>.json)")

    p = sub.add_parser("vacuum", help="minimise the vacuum functional on a window")
    _add_run_flags(p)
    p.add_argument("--out", help="manifest JSON path")
    p.add_argument("--csv", help="CSV of the optimal trajectory on the window")

    p = sub.add_parser("sweep", help="repeat solve or vacuum over a parameter grid")
    _add_run_flags(p)
    p.add_argument("--task", choices=("solve", "vacuum"), default="solve")
    p.add_argument("--param", required=True, help="config key to vary")
    p.add_argument("--values", nargs="+", type=float, required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)

    p = sub.add_parser("plot", help="render CSV columns to SVG")
    p.add_argument("csv")
    p.add_argument("--x", default="t")
    p.add_argument("--y", nargs="+", default=["sigma"])
    p.add_argument("--square", action="store_true", help="plot the square of each y column")
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--out", help="optional JSON report")
    return ap


def _overrides(args):
    keys = set(RunConfig.keys())
    return {k: v for k, v in vars(args).items() if k in keys and k not in ("out", "csv") and v is not None}


def _threads():
    try:
        return max(1, int(os.environ.get("VACUA_THREADS", "1")))
    except ValueError:
        return 1


def cmd_solve(args):
    cfg = RunConfig.load(args.config, _overrides(args))
    start = time.perf_counter()
    cols, summary = run_task(cfg, "solve")
    out = args.out or "trajectory.csv"
    digest = emit_csv(cols, out)
    manifest = args.manifest or str(Path(out).with_suffix(".json"))
    write_manifest(manifest, cfg.to_dict(), summary, {Path(out).name: digest}, time.perf_counter() - start)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_vacuum(args):
    cfg = RunConfig.load(args.config, _overrides(args))
    start = time.perf_counter()
    cols, results = run_task(cfg, "vacuum")
    artifacts = {}
    if args.csv:
        artifacts[Path(args.csv).name] = emit_csv(cols, args.csv)
    out = args.out or "vacuum.json"
    write_manifest(out, cfg.to_dict(), results, artifacts, time.perf_counter() - start)
    res = results["result"]
    print(f"{res['classification']}  Z={res['Z_min']:.6g}  metric={res['metric']:.3g}  wrote {out}")
    return EXIT_OK


def cmd_sweep(args):
    base = RunConfig.load(args.config, _overrides(args))
    if args.param not in RunConfig.keys():
        raise ConfigError(f"unknown sweep parameter {args.param!r}")
    cfgs = []
    for v in args.values:
        d = base.to_dict()
        d[args.param] = v
        cfgs.append(RunConfig.from_dict(d))
    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        outs = list(ex.map(lambda c: run_task(c, args.task), cfgs))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts, points = {}, []
    for i, (v, (cols, res)) in enumerate(zip(args.values, outs)):
        name = f"point_{i:03d}.csv"
        artifacts[name] = emit_csv(cols, out_dir / name)
        points.append({"index": i, args.param: v, "csv": name, "results": res})
    cfg_echo = dict(base.to_dict(), sweep={"param": args.param, "values": list(args.values), "task": args.task})
    write_manifest(out_dir / "manifest.json", cfg_echo, points, artifacts, time.perf_counter() - start)
    print(f"wrote {len(points)} runs to {out_dir}")
    return EXIT_OK


def cmd_plot(args):
    emit_svg(args.csv, args.x, args.y, args.out, square=args.square, title=args.title)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_validate(args):
    checks = invariant_checks()
    for c in checks:
        print(c.line())
    if args.out:
        Path(args.out).write_text(json.dumps([dict(dataclasses.asdict(c), passed=c.passed) for c in checks],
                                             indent=2) + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC


COMMANDS = {"solve": cmd_solve, "vacuum": cmd_vacuum, "sweep": cmd_sweep, "plot": cmd_plot, "validate": cmd_validate}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except CONFIG_ERRORS as exc:
        print(f"vacua: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"vacua: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
