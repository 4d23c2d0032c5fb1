"""Command-line front end.

Subcommands: simulate, zeros, phase, spectrum, omega (each takes a scenario
file; the named diagnostic is forced on), and verify-appendix.  Exit codes:
0 success, 2 config validation, 3 runtime failure (blow-up included),
4 diagnostic invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from .config import parse_config
from .errors import ParseError, ValidationError
from .runner import format_appendix_report, run_scenario, verify_appendix

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_INVARIANT = 4


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("config", help="scenario file")
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--seed", type=int, default=None,
                   help="override the seed of random presets")
    p.add_argument("--quiet", action="store_true", help="suppress summary output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circlelab",
                                 description="parabolic dynamics laboratory on the circle")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, forced in (("simulate", None), ("zeros", "zeros"),
                         ("phase", "phase"), ("spectrum", "spectrum"),
                         ("omega", "omega")):
        p = sub.add_parser(name, help=f"run a scenario ({forced or 'as configured'})")
        _add_common(p)
        p.set_defaults(forced_diag=forced)
    va = sub.add_parser("verify-appendix",
                        help="dyadic forcing bound check (no PDE solve)")
    va.add_argument("--n-max", type=int, default=20)
    va.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "verify-appendix":
        try:
            report = verify_appendix(args.n_max)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        if not args.quiet:
            print(format_appendix_report(report), end="")
        return EXIT_OK if report.all_bounds_hold else EXIT_INVARIANT

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        cfg = parse_config(text)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.forced_diag is not None:
        setattr(cfg.diagnostics, args.forced_diag, True)

    result = run_scenario(cfg, cfg_text=text, out_override=args.out,
                          seed_override=args.seed, quiet=args.quiet)
    if result.manifest.status != "success":
        print(f"run failed: {result.manifest.error}", file=sys.stderr)
        return EXIT_RUNTIME
    if result.zero_violations:
        print(f"zero-count monotonicity violated at {result.zero_violations} "
              "sample(s)", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
