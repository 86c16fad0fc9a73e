"""Command-line entry point.

Verbs: simulate, squeeze, track, fisher, backaction, rearrange, export,
report. Global flags: --config <path>, --seed <u64>, --out <dir>,
--threads <n>. Exit codes: 0 success, 2 configuration error, 3 numerical
failure. The thread count only controls kernel parallelism and never changes
any output byte.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, experiments
from ._kernels import USE_NUMBA
from .config import default_spec, load_spec
from .errors import ConfigError, IntegrityError, NumericalError

_DRIVERS = {
    "simulate": (experiments.simulate_trace, "trace.csv"),
    "squeeze": (experiments.run_squeezing_sweep, "squeezing.csv"),
    "track": (experiments.run_ou_tracking, "tracking.csv"),
    "fisher": (experiments.run_fisher, "fisher.csv"),
    "backaction": (experiments.run_backaction_sweep, "backaction.csv"),
    "rearrange": (experiments.run_rearrangement, "rearrangement.csv"),
    "report": (experiments.run_report, "report.csv"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintrack",
        description="Desk-scale simulation and estimation for a continuously "
        "monitored spin-squeezed magnetometer.",
    )
    parser.add_argument("--version", action="version", version=f"spintrack {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in [
        ("simulate", "generate one signal/record trace"),
        ("squeeze", "squeezing versus segment duration and gap time"),
        ("track", "OU tracking error versus relaxation rate"),
        ("fisher", "Monte-Carlo Fisher information and Cramer-Rao bound"),
        ("backaction", "conditional noise versus conjugate-probe strength"),
        ("rearrange", "tracking error versus record rearrangement degree"),
        ("export", "export a simulated dataset with train/test split"),
        ("report", "analytic headline numbers for the configured sensor"),
    ]:
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="TOML/JSON experiment spec")
        p.add_argument("--seed", type=int, default=None, help="override the spec seed")
        p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        p.add_argument("--threads", type=int, default=None, help="kernel thread count")
        if verb == "export":
            p.add_argument("--split", type=float, default=0.8, help="train fraction")
    return parser


def _configure_threads(n) -> None:
    if n is None:
        return
    if n < 1:
        raise ConfigError("--threads must be at least 1")
    if USE_NUMBA:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _configure_threads(args.threads)
        spec = (
            load_spec(args.config, seed_override=args.seed)
            if args.config is not None
            else default_spec(**({"seed": args.seed} if args.seed is not None else {}))
        )
        out_dir = Path(args.out)
        if args.verb == "export":
            path = experiments.export_dataset(spec, split=args.split, out=out_dir / "dataset")
            print(path)
            return 0
        driver, filename = _DRIVERS[args.verb]
        table = driver(spec)
        path = table.to_csv(out_dir / filename)
        print(path)
        return 0
    except (ConfigError, IntegrityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
