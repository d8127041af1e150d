"""Command-line entry points.

    onebit-crew design --config scenario.json [--algorithm crew_onebit] [--out DIR]
    onebit-crew estimate-cov --config cov.json [--out DIR]
    onebit-crew sweep --config sweep.json --out DIR [--jobs N]
    onebit-crew selftest

``--seed`` and ``--oracle-mode`` override the scenario fields of the same
name. Exit codes: 0 success, 1 hard error, 2 sweep with some failed cells.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, onebit, selftest
from .crew import ALGORITHMS, design
from .exceptions import ConfigError, CrewError
from .scenario import ScenarioConfig, load_json

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.oracle_mode is not None:
        out["oracle_mode"] = args.oracle_mode
    return out


def _complex_matrix(obj, what: str) -> np.ndarray:
    try:
        re = np.asarray(obj["real"], dtype=float)
        im = np.asarray(obj.get("imag", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be an object with 'real' (and optional 'imag') arrays") from exc
    if re.ndim != 2 or re.shape != im.shape or re.shape[0] != re.shape[1]:
        raise ConfigError(f"{what} must be a square matrix")
    return re + 1j * im


def _matrix_json(M) -> dict:
    return {"real": np.real(M).tolist(), "imag": np.imag(M).tolist()}


def _emit(payload: dict, out_dir, filename: str):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_dir is None:
        sys.stdout.write(text)
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / filename).write_text(text)
    print(out / filename)


def cmd_design(args) -> int:
    sc = ScenarioConfig.from_json(args.config) if args.config else ScenarioConfig()
    sc = sc.replace(**_overrides(args))
    outcome = design(args.algorithm, sc)
    payload = outcome.to_dict()
    payload["scenario"] = sc.to_dict()
    _emit(payload, args.out, "outcome.json")
    return EXIT_OK


def cmd_estimate_cov(args) -> int:
    if not args.config:
        raise ConfigError("estimate-cov needs --config with a 'covariance' entry")
    data = load_json(args.config)
    unknown = sorted(set(data) - {"covariance", "snapshots", "seed"})
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    if "covariance" not in data:
        raise ConfigError("missing 'covariance'")
    R = _complex_matrix(data["covariance"], "covariance")
    M = int(data.get("snapshots", 100_000))
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    truth = onebit.normalize(R).matrix
    est = onebit.estimate_normalized(R, M, seed).matrix
    payload = {
        "snapshots": M,
        "seed": seed,
        "estimate": _matrix_json(est),
        "analytic": _matrix_json(truth),
        "max_abs_error": float(np.max(np.abs(est - truth))),
    }
    _emit(payload, args.out, "estimate.json")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep needs --config")
    data = load_json(args.config)
    cfg = bench.SweepConfig.from_dict(data)
    ov = _overrides(args)
    if ov:
        cfg = cfg.replace(scenario=cfg.scenario.replace(**ov))
    out = args.out or "."
    try:
        table = bench.run_sweep(cfg, jobs=args.jobs)
    except bench.SweepFailed as exc:
        bench.emit_report(exc.table, out)
        for r in exc.table.errors[:5]:
            print(f"error: {r.algorithm} N={r.N} trial={r.trial}: {r.error}", file=sys.stderr)
        return EXIT_ERROR
    for path in bench.emit_report(table, out):
        print(path)
    if table.errors:
        print(f"{len(table.errors)} of {len(table.rows)} cells failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_selftest(args) -> int:
    return EXIT_OK if selftest.run(verbose=True) else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="onebit-crew", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=str)
        sp.add_argument("--out", type=str)
        sp.add_argument("--seed", type=_u64)
        sp.add_argument("--oracle-mode", type=_bool, dest="oracle_mode")
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("design", help="run one algorithm on one scenario")
    common(sp)
    sp.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="crew_onebit")
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("estimate-cov", help="one-bit normalized covariance estimate")
    common(sp)
    sp.set_defaults(func=cmd_estimate_cov)

    sp = sub.add_parser("sweep", help="Monte-Carlo sweep over N")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("selftest", help="quick invariant checks")
    common(sp)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (CrewError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
