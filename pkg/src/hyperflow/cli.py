"""Command line entry point: ``hyperflow run|sweep|verify``."""

from __future__ import annotations

import argparse
import json
import sys

from .problem import PositivityError
from .scenario import SWEEP_PARAMS, SchemaError, load_scenario, run_scenario, sweep, verify

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--quiet", action="store_true", help="only print the final status")
    common.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    parser = argparse.ArgumentParser(
        prog="hyperflow",
        description="Prescribed Gauss curvature flows of radial graphs in hyperbolic space.",
        parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run one scenario file")
    p.add_argument("scenario")

    p = sub.add_parser("sweep", parents=[common], help="run a scenario over parameter values")
    p.add_argument("scenario")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, type=_values)

    p = sub.add_parser("verify", parents=[common], help="run every entry of a suite file")
    p.add_argument("suite")
    return parser


def _fail(kind: str, exc: Exception) -> int:
    payload = {"error": kind, "message": str(exc)}
    if isinstance(exc, SchemaError):
        payload["path"] = exc.path
    print(json.dumps(payload), file=sys.stderr)
    return EXIT_INPUT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    figures = not args.no_figures
    try:
        if args.command == "run":
            oc = run_scenario(load_scenario(args.scenario), args.out, quiet=args.quiet, figures=figures)
            if oc.exit_code:
                print(json.dumps({"error": "scenario-failed", "name": oc.name,
                                  "failures": oc.summary["failures"]}), file=sys.stderr)
            print(f"{oc.name}: {oc.summary['verdict']} -> {oc.out_dir}")
            return oc.exit_code
        if args.command == "sweep":
            report = sweep(load_scenario(args.scenario), args.param, args.values, args.out,
                           quiet=args.quiet, figures=figures)
            for row in report["rows"]:
                print(f"{args.param}={row['value']:g}: {row['verdict']} (exit {row['exit_code']})")
            for key, val in report["stats"].items():
                print(f"{key}: {val}")
            return EXIT_OK if all(r["exit_code"] == 0 for r in report["rows"]) else EXIT_FAIL
        return verify(args.suite, args.out, quiet=args.quiet, figures=figures)
    except SchemaError as exc:
        return _fail("schema-error", exc)
    except PositivityError as exc:
        return _fail("positivity-violation", exc)
    except FileNotFoundError as exc:
        return _fail("file-not-found", exc)


if __name__ == "__main__":
    sys.exit(main())
