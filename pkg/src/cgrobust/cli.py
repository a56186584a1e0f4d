"""Command-line front end.

Exit codes: 0 success, 1 domain error (unreadable or invalid input),
2 usage error, 3 non-empty diff under ``diff --quiet``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cgx import KBParseError, ManifestError, load_manifest, parse_kb
from .criteria import CriteriaError, Criterion, aggregate, eval_history, format_criteria, format_flat, parse_criteria
from .diff import diff, format_diff, format_records
from .model import KnowledgeBase
from .render import RenderError, render_dot, render_svg

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_CHANGED = 0, 1, 2, 3


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Failure(EXIT_DOMAIN, f"{path}: {exc.strerror or exc}") from None


def _load(path: str) -> KnowledgeBase:
    try:
        return parse_kb(_read(path))
    except KBParseError as exc:
        raise _Failure(EXIT_DOMAIN, "\n".join(f"{path}:{e}" for e in exc.errors)) from None


def _emit(data: str | bytes, output: str | None) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if output:
        Path(output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def cmd_validate(args: argparse.Namespace) -> int:
    data = _read(args.path)
    try:
        parse_kb(data)
    except KBParseError as exc:
        for error in exc.errors:
            print(f"{args.path}:{error}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_diff(args: argparse.Namespace) -> int:
    old, new = _load(args.old), _load(args.new)
    report = diff(old, new)
    if args.quiet:
        return EXIT_CHANGED if report.records else EXIT_OK
    text = format_diff(report) if args.format == "text" else format_records(report)
    _emit(text, args.output)
    return EXIT_OK


def _version_paths(args: argparse.Namespace) -> list[str]:
    paths = list(args.paths)
    manifest = args.manifest
    if manifest is None and len(paths) == 1 and Path(paths[0]).suffix != ".cgx":
        manifest = paths.pop()
    if manifest is not None:
        if paths:
            raise _Failure(EXIT_USAGE, "give either a manifest or version files, not both")
        try:
            paths = load_manifest(_read(manifest), base=Path(manifest).parent)
        except ManifestError as exc:
            raise _Failure(EXIT_DOMAIN, f"{manifest}: {exc}") from None
    if len(paths) < 2:
        raise _Failure(EXIT_USAGE, "eval needs at least two versions")
    return paths


def cmd_eval(args: argparse.Namespace) -> int:
    versions = [_load(p) for p in _version_paths(args)]
    table = eval_history(versions)
    if args.aggregate:
        table = aggregate(table, versions[-1])
    text = format_criteria(table) if args.out == "xml" else format_flat(table)
    _emit(text, args.output)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    if args.criterion is not None and args.criteria is None:
        raise _Failure(EXIT_USAGE, "--criterion requires --criteria <table file>")
    if args.criteria is not None and not Path(args.criteria).is_file():
        raise _Failure(EXIT_USAGE, f"criteria file not found: {args.criteria}")
    kb = _load(args.kb)
    table = None
    if args.criteria is not None:
        try:
            table = parse_criteria(_read(args.criteria).decode("utf-8"))
        except (CriteriaError, UnicodeDecodeError) as exc:
            raise _Failure(EXIT_DOMAIN, f"{args.criteria}: {exc}") from None
    try:
        if args.out == "svg":
            data = render_svg(kb, table, args.criterion)
        else:
            data = render_dot(kb, table, args.criterion)
    except RenderError as exc:
        raise _Failure(EXIT_DOMAIN, str(exc)) from None
    _emit(data, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgrobust",
        description="Diff conceptual-graph knowledge-base versions and evaluate update-activity robustness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a .cgx file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("diff", help="list ADD/DEL/MOD changes between two versions")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--format", choices=("text", "records"), default="text")
    p.add_argument("--quiet", action="store_true", help="print nothing; exit 3 if the versions differ")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("eval", help="evaluate robustness criteria over a version history")
    p.add_argument("paths", nargs="*", help="version files in chronological order, or one manifest")
    p.add_argument("--manifest", "-m")
    p.add_argument("--out", choices=("xml", "flat"), default="xml")
    p.add_argument("--aggregate", action="store_true", help="add context and GRAPH rows")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="draw a version, optionally colored by a criterion")
    p.add_argument("kb")
    p.add_argument("--criteria", help="criteria table written by eval")
    p.add_argument("--criterion", choices=[c.value for c in Criterion])
    p.add_argument("--out", choices=("svg", "dot"), default="svg")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _Failure as exc:
        print(f"cgrobust: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
