"""``netcalc`` command-line entry point.

Exit codes: 0 success, 1 usage, parse or computation error, 2 verdict
other than ``converged`` when ``--expect converged`` was given.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import ExperimentError, SpecError
from .config import COMMANDS, parse_spec, with_overrides
from .output import emit
from .run import execute

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netcalc",
        description="Probe nets of finite-section minors, Fredholm determinants and Bochner integrals.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="commands:\n" + "\n".join(
            f"  {name:<20} {what}\n  {'':<20} [{anchor}]" for name, (what, anchor) in COMMANDS.items()
        ),
    )
    parser.add_argument("command", choices=list(COMMANDS), metavar="command", help="see the list below")
    parser.add_argument("--spec", required=True, help="experiment file (TOML)")
    parser.add_argument("--out", help="output file (default: standard output)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--tol", type=float)
    parser.add_argument("--n-max", type=int)
    parser.add_argument("--trunc-dim", type=int)
    parser.add_argument("--k-max", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--strategies", help="comma-separated, e.g. coordinate,adversarial+,adversarial-,random")
    parser.add_argument("--expect", choices=("converged",), help="exit with status 2 unless the verdict matches")
    return parser


def _err(msg: str) -> None:
    print(f"netcalc: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        spec = parse_spec(args.spec)
        if spec.command != args.command:
            raise SpecError(f"file describes {spec.command!r}, not {args.command!r}", field="command")
        spec = with_overrides(
            spec, tol=args.tol, n_max=args.n_max, trunc_dim=args.trunc_dim, k_max=args.k_max,
            seed=args.seed, strategies=args.strategies,
        )
    except SpecError as exc:
        _err(str(exc))
        return 1
    except OSError as exc:
        _err(str(exc))
        return 1
    try:
        report = execute(spec)
    except SpecError as exc:
        _err(str(exc))
        return 1
    except ExperimentError as exc:
        _err(str(exc))
        return 2 if args.expect else 1
    try:
        emit(report, args.format, args.out)
    except OSError as exc:
        _err(str(exc))
        return 1
    if args.expect and report.summary.get("verdict") != args.expect:
        _err(f"verdict {report.summary.get('verdict')!r}, expected {args.expect!r}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
