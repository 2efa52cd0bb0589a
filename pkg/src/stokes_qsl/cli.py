"""``stokes-qsl`` command-line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 partial sweep failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import harness
from .errors import StokesQSLError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_PARTIAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument errors count as validation errors (exit 1), not argparse's 2."""

    def error(self, message):
        raise _UsageError(message)


def _range(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI but got {text!r}")
    return parts


def _common_flags() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", metavar="FILE", default=S, help="key=value settings file; flags win")
    common.add_argument("--n", type=int, default=S, help="total photon number N")
    common.add_argument("--eps", type=float, default=S, help="cross-Kerr coupling epsilon")
    common.add_argument("--alpha-plus", metavar="RE,IM", default=S)
    common.add_argument("--alpha-minus", metavar="RE,IM", default=S)
    common.add_argument("--p", type=float, default=S, help="|alpha+|^2 with real amplitudes (replaces the alphas)")
    common.add_argument("--t-max", type=float, default=S)
    common.add_argument("--samples", type=int, default=S, help="time samples")
    common.add_argument("--eps-range", metavar="LO,HI", type=_range, default=S)
    common.add_argument("--eps-samples", type=int, default=S)
    common.add_argument("--n-range", metavar="LO,HI", type=_range, default=S)
    common.add_argument("--analytic", action="store_true", default=S,
                        help="classical track from the closed form instead of the ODE")
    common.add_argument("--out", metavar="PATH", default=S, help="output directory")
    common.add_argument("--svg", action="store_true", default=S, help="also write an SVG plot")
    common.add_argument("--workers", type=int, default=S)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="stokes-qsl", description="Classical vs quantum polarization dynamics and speed limits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("evolve", parents=[common], help="Stokes trajectories in both regimes")
    sub.add_parser("distance-map", parents=[common], help="D_HS over an (eps, t) grid")
    sub.add_parser("qsl-scan", parents=[common], help="speed limits and Q(N) over a range of N")
    sw = sub.add_parser("sweep", parents=[common], help="run a job file on a worker pool")
    sw.add_argument("jobs", metavar="JOBS", help="one '<command> key=value ...' job per line")
    return parser


def _settings(ns: argparse.Namespace) -> dict:
    """Merge the config file (if any) with the explicitly passed flags; flags win."""
    flags = dict(vars(ns))
    flags.pop("command")
    flags.pop("jobs", None)
    settings = harness.read_config_file(flags.pop("config")) if "config" in flags else {}
    # output directory: --out, then the environment, then the file
    if os.environ.get(harness.OUT_ENV):
        settings.pop("out", None)
    for key in ("eps_range", "n_range"):
        if key in flags:
            lo, hi = flags.pop(key)
            settings.update(harness.parse_assignments([f"{key}={lo},{hi}"]))
    for key in ("alpha_plus", "alpha_minus"):
        if key in flags:
            flags[key] = harness.parse_complex(flags[key])
    settings.update(flags)
    return settings


def _sweep(ns: argparse.Namespace, settings: dict) -> int:
    jobs = harness.parse_jobs(Path(ns.jobs).read_text(encoding="utf-8"))
    results = harness.run_sweep(jobs, workers=settings.get("workers", 1), out=settings.get("out"))
    failed = [r for r in results if not r.ok]
    for r in failed:
        print(f"job {r.index} ({r.command}) failed: {r.error}", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        settings = _settings(ns)
        if ns.command == "sweep":
            return _sweep(ns, settings)
        paths = harness.run_command(harness.RunConfig(command=ns.command, **settings))
        for p in paths:
            print(p)
        return EXIT_OK
    except _UsageError as exc:
        print(f"stokes-qsl: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StokesQSLError as exc:
        print(f"stokes-qsl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"stokes-qsl: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
