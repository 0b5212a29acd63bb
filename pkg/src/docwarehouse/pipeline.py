"""End-to-end ingestion: load sources, build the warehouse, convert links,
optionally merge equivalent classes, and write everything to disk."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .convertlinks import LinkReport, convert_links
from .createdw import KeyCatalog, ingest_all, write_catalog
from .docmodel import Warehouse, iter_references, write_warehouse
from .errors import SourceValidationError
from .mergeclasses import MergeReport, load_ontology, merge_classes, write_merge_report
from .relmodel import RelationalDatabase, load_snapshot, validate_database
from .sqldump import load_sql_dump

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Source:
    kind: str  # "snapshot" | "sqldump"
    path: Path
    db_name: str | None = None

    @classmethod
    def parse(cls, spec: str) -> "Source":
        """Parse ``snapshot:<dir>`` or ``sqldump:<file>:<dbname>``."""
        kind, sep, rest = spec.partition(":")
        if kind == "snapshot" and sep and rest:
            return cls("snapshot", Path(rest))
        if kind == "sqldump" and sep:
            path, sep2, name = rest.rpartition(":")
            if sep2 and path and name:
                return cls("sqldump", Path(path), name)
            raise ValueError(f"sqldump source needs a database name: {spec!r}")
        raise ValueError(f"source must be snapshot:<dir> or sqldump:<file>:<dbname>, got {spec!r}")

    def load(self) -> RelationalDatabase:
        if self.kind == "snapshot":
            return load_snapshot(self.path)
        return load_sql_dump(self.path, self.db_name)


@dataclass(frozen=True)
class PipelineConfig:
    sources: tuple[Source, ...]
    warehouse_name: str
    out_dir: Path
    ontology_path: Path | None = None
    link_policy: str = "strict"
    merge_policy: str = "strict"

    def __post_init__(self):
        if not self.sources:
            raise ValueError("at least one source is required")
        out = Path(self.out_dir).resolve()
        for src in self.sources:
            if Path(src.path).resolve() == out:
                raise ValueError(f"output directory {self.out_dir} is also a source")
        for policy in (self.link_policy, self.merge_policy):
            if policy not in ("strict", "lenient"):
                raise ValueError(f"policy must be strict or lenient, got {policy!r}")


@dataclass
class PipelineResult:
    warehouse: Warehouse
    catalog: KeyCatalog
    links: LinkReport
    merge: MergeReport | None = None
    findings: list[str] = field(default_factory=list)

    def summary_lines(self) -> list[str]:
        wh = self.warehouse
        refs = sum(1 for rec in wh.records() for v in rec.couples.values() for _ in iter_references(v))
        merge = self.merge
        return [
            f"warehouse: {wh.name}",
            f"classes: {len(wh.classes)}",
            f"records: {wh.record_count}",
            f"references: {refs}",
            f"links converted: {self.links.converted}",
            f"links absent: {self.links.absent}",
            f"links dangling: {len(self.links.dangling)}",
            f"merged classes: {len(merge.groups) if merge else 0}",
            f"merged records: {merge.merged if merge else 0}",
            f"merge conflicts: {merge.conflict_count if merge else 0}",
        ]


def run_pipeline(config: PipelineConfig, write: bool = True) -> PipelineResult:
    dbs = [src.load() for src in config.sources]
    findings: list[str] = []
    for db in dbs:
        report = validate_database(db)
        for line in report.lines():
            log.warning(line)
        findings.extend(report.lines())
    if findings and config.link_policy == "strict":
        raise SourceValidationError(findings)
    wh, cat = ingest_all(dbs, config.warehouse_name)
    links = convert_links(wh, cat, strict=config.link_policy == "strict")
    merge = None
    if config.ontology_path is not None:
        ont = load_ontology(config.ontology_path, wh)
        merge = merge_classes(wh, ont, strict=config.merge_policy == "strict")
    result = PipelineResult(wh, cat, links, merge, findings)
    if write:
        write_result(result, config.out_dir)
    return result


def write_result(result: PipelineResult, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    write_warehouse(result.warehouse, out)
    write_catalog(result.catalog, out, conversion=result.links.to_json())
    report_path = out / "merge_report.json"
    if result.merge is not None:
        write_merge_report(result.merge, out)
    elif report_path.exists():
        report_path.unlink()
    return out
