"""Command-line driver.

    docwarehouse ingest --source snapshot:<dir> --source sqldump:<file>:<db> \\
                        --out <dir> --name <wh> [--ontology <file>] \\
                        [--links strict|lenient] [--merge strict|lenient]
    docwarehouse validate <source>...
    docwarehouse stats <dir>
    docwarehouse inspect <dir> <rid>

Exit status: 0 on success, 1 on any pipeline error or validation finding,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .docmodel import Rid, dumps_pretty, get_record, iter_references, read_warehouse
from .errors import WarehouseError
from .pipeline import PipelineConfig, Source, run_pipeline
from .relmodel import validate_database


def _source(spec: str) -> Source:
    try:
        return Source.parse(spec)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docwarehouse",
        description="Ingest relational databases into a document-oriented warehouse.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="run the full ingestion pipeline")
    ingest.add_argument("--source", action="append", type=_source, default=[], dest="sources",
                        metavar="SOURCE", help="snapshot:<dir> or sqldump:<file>:<dbname> (repeatable)")
    ingest.add_argument("--out", required=True, type=Path, help="output warehouse directory")
    ingest.add_argument("--name", required=True, help="warehouse name")
    ingest.add_argument("--ontology", type=Path, help="ontology file enabling class merging")
    ingest.add_argument("--links", choices=("strict", "lenient"), default="strict")
    ingest.add_argument("--merge", choices=("strict", "lenient"), default="strict")

    validate = sub.add_parser("validate", help="report key and link defects in sources")
    validate.add_argument("sources", nargs="+", type=_source, metavar="SOURCE")

    stats = sub.add_parser("stats", help="per-class counts of a warehouse directory")
    stats.add_argument("dir", type=Path)

    inspect = sub.add_parser("inspect", help="print one record")
    inspect.add_argument("dir", type=Path)
    inspect.add_argument("rid")
    return parser


def cmd_ingest(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if not args.sources:
        parser.error("ingest needs at least one --source")
    try:
        config = PipelineConfig(
            tuple(args.sources), args.name, args.out, args.ontology, args.links, args.merge
        )
    except ValueError as exc:
        parser.error(str(exc))
    result = run_pipeline(config)
    for line in result.summary_lines():
        print(line)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    total = 0
    for src in args.sources:
        report = validate_database(src.load())
        for line in report.lines():
            print(line)
        print(f"{report.database}: {len(report)} finding(s)")
        total += len(report)
    return 1 if total else 0


def cmd_stats(args: argparse.Namespace) -> int:
    wh = read_warehouse(args.dir)
    print("class\tcluster\trecords\treferences")
    for cls in wh.classes:
        refs = sum(1 for rec in cls.records for v in rec.couples.values() for _ in iter_references(v))
        print(f"{cls.name}\t{cls.cluster}\t{len(cls.records)}\t{refs}")
    return 0


def cmd_inspect(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        rid = Rid.parse(args.rid)
    except ValueError as exc:
        parser.error(str(exc))
    wh = read_warehouse(args.dir)
    sys.stdout.write(dumps_pretty(get_record(wh, rid).to_json(header=True)))
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ingest":
            return cmd_ingest(args, parser)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "stats":
            return cmd_stats(args)
        return cmd_inspect(args, parser)
    except WarehouseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
