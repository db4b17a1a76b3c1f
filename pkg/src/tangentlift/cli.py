"""Command-line entry point.

    tangentlift verify-connection SPEC [--points N] [--seed S] [--tol T] [--json PATH]
    tangentlift classify SPEC --field NAME [...]
    tangentlift check-closed SPEC --field NAME [...]
    tangentlift verify-paper DIR [...]

Exit status: 0 when every check passes, 1 on a failed check or a
counterexample candidate, 2 on bad input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import checks
from .expr import ExprError
from .geometry import GeometryError
from .specfile import SpecFileError, load_spec

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _tolerance(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--points", type=_positive, default=None,
                        help="sample points per check (default 50; verify-paper uses per-criterion counts)")
    common.add_argument("--seed", type=int, default=0, help="sampler seed (default 0)")
    common.add_argument("--tol", type=_tolerance, default=None, help="override the per-check tolerance")
    common.add_argument("--json", metavar="PATH", default=None, help="also write the JSON report here")

    parser = _Parser(prog="tangentlift", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-connection", parents=[common], help="connection table and frame checks")
    p.add_argument("spec")
    for name, help_text in (("classify", "lift analysis and theorem audits for one field"),
                            ("check-closed", "closedness conditions for one field")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("spec")
        p.add_argument("--field", required=True)
    p = sub.add_parser("verify-paper", parents=[common], help="full acceptance suite over a spec directory")
    p.add_argument("directory")
    return parser


def _load(path: str):
    try:
        return load_spec(path)
    except (SpecFileError, GeometryError, ExprError) as exc:
        raise InputError(str(exc)) from None


def _field(spec, name: str) -> str:
    if name not in spec.vector_fields:
        known = ", ".join(sorted(spec.vector_fields)) or "none"
        raise InputError(f"{spec.name} has no vector field {name!r} (known: {known})")
    return name


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    points = args.points or 50
    try:
        if args.command == "verify-connection":
            report = checks.verify_connection(_load(args.spec), points, args.seed, args.tol)
        elif args.command == "classify":
            spec = _load(args.spec)
            report = checks.classify(spec, _field(spec, args.field), points, args.seed, args.tol)
        elif args.command == "check-closed":
            spec = _load(args.spec)
            report = checks.check_closed(spec, _field(spec, args.field), points, args.seed, args.tol)
        else:
            directory = Path(args.directory)
            files = sorted(directory.glob("*.spec")) if directory.is_dir() else []
            if not files:
                raise InputError(f"no .spec files in {directory}")
            specs = {}
            for f in files:
                spec = _load(str(f))
                specs[spec.name] = spec
            report = checks.verify_paper(specs, args.seed, args.points, args.tol, label=directory.name)
    except InputError as exc:
        print(f"tangentlift: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    print(report.to_table())
    if args.json:
        try:
            Path(args.json).write_text(report.to_json())
        except OSError as exc:
            print(f"tangentlift: error: cannot write {args.json}: {exc.strerror}", file=sys.stderr)
            return EXIT_INPUT
    failed, candidates = len(report.failures), len(report.counterexamples)
    print(f"\n{len(report.entries)} checks, {failed} failed, {candidates} counterexample candidate(s)")
    return EXIT_OK if report.ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
