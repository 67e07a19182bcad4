"""Command line entry point: ``heyde [CONFIG] [--tol R] [--bound N] [--format F]``."""

from __future__ import annotations

import argparse
import sys

from .config import Report, parse_config, parse_lines, parse_rational
from .errors import ConfigError
from .jobs import run


def _rational(text):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="heyde",
        description="Check conditional-symmetry characterizations on finite Abelian groups.",
    )
    p.add_argument("config", nargs="?", default="-", help="config file, '-' or omitted for stdin")
    p.add_argument("--tol", type=_rational, help="residual tolerance as a rational, overrides the config")
    p.add_argument("--bound", type=int, help="largest group order to enumerate, overrides the config")
    p.add_argument("--format", choices=("human", "machine"), default="machine")
    p.add_argument("--timing", action="store_true", help="append elapsed_ms to machine reports")
    return p


def _cmd_guess(text: str) -> str:
    try:
        for _, key, value in parse_lines(text):
            if key == "cmd":
                return value
    except ConfigError:
        pass
    return "unknown"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.config == "-":
        text = sys.stdin.read()
    else:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    try:
        cfg = parse_config(text, validate=False)
    except ConfigError as exc:
        report = Report(_cmd_guess(text), "ERROR")
        report.add("error", exc.code)
        if exc.line is not None:
            report.add("line", exc.line)
        report.add("message", exc.message)
    else:
        report = run(cfg, tol=args.tol, bound=args.bound)
    sys.stdout.write(report.render(args.format, timing=args.timing))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
