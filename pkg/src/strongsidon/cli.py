"""Command-line entry point: ``strongsidon MODE [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analysis import (
    EXIT_CONFIG,
    EXIT_RESOURCE,
    EXIT_VIOLATED,
    MODES,
    ExperimentConfig,
    run_experiment,
)
from .errors import NotFound, TooLarge
from .params import StrongParams
from .verification import DEFAULT_MEM_BUDGET

log = logging.getLogger("strongsidon")


def _c_value(text: str):
    if text == "optimal":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--c takes a number or 'optimal', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="strongsidon",
        description="Construct, verify and measure strong B_h sets.",
    )
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("input", nargs="?", type=Path, help="set file for verify/analyze")
    ap.add_argument("--h", type=int, default=None)
    ap.add_argument("--alpha", type=float, default=None)
    ap.add_argument("--gamma", type=float, default=None)
    ap.add_argument("--c", type=_c_value, default=None, help="a value in (0, 1/2) or 'optimal'")
    ap.add_argument("--k-max", type=int, default=None)
    ap.add_argument("--n-max", type=int, default=None)
    ap.add_argument("--delta", type=float, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--basis", choices=("smallest", "random"), default="smallest")
    ap.add_argument("--f-log-base", choices=("e", "2", "10"), default="e")
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--mem-budget", type=int, default=DEFAULT_MEM_BUDGET, metavar="BYTES")
    ap.add_argument("--mc-trials", type=int, default=0, help="Monte Carlo replications (random-transfer)")
    ap.add_argument("--i-max", type=int, default=50, help="intervals covered by the replications")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    explicit = {k for k in ("h", "alpha", "gamma") if getattr(args, k) is not None}
    params = StrongParams(
        args.h if args.h is not None else 2,
        args.alpha if args.alpha is not None else 0.0,
        args.gamma if args.gamma is not None else 1.0,
    )
    return ExperimentConfig(
        mode=args.mode,
        params=params,
        c=args.c,
        k_max=args.k_max,
        n_max=args.n_max,
        delta=args.delta,
        seed=args.seed,
        basis=args.basis,
        f_log_base=args.f_log_base,
        out=args.out,
        input=args.input,
        mem_budget=args.mem_budget,
        mc_trials=args.mc_trials,
        i_max=args.i_max,
        explicit=explicit,
    )


def _fail(out: Path, exc: BaseException, code: int) -> int:
    print(f"error: {exc}", file=sys.stderr)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "error.json").write_text(
            json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}, indent=2)
            + "\n"
        )
    except OSError:
        pass
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        return _fail(args.out, exc, EXIT_CONFIG)
    try:
        code = run_experiment(cfg)
    except (TooLarge, MemoryError, OverflowError) as exc:
        return _fail(cfg.out, exc, EXIT_RESOURCE)
    except NotFound as exc:
        return _fail(cfg.out, exc, EXIT_VIOLATED)
    except (ValueError, OSError, KeyError) as exc:
        return _fail(cfg.out, exc, EXIT_CONFIG)
    if code:
        log.warning("a checked property failed; see %s", cfg.out / "summary.json")
    return code


if __name__ == "__main__":
    sys.exit(main())
