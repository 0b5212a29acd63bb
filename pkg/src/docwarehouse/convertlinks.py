"""Rewrite foreign-key couples into record references using the key catalog,
and verify afterwards that every reference in the warehouse resolves."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .createdw import KeyCatalog, LinkSpec, class_name_for
from .docmodel import Rid, Warehouse, encode_value, get_record, iter_references
from .errors import DanglingLinkError, NotFoundError


@dataclass(frozen=True)
class DanglingIncident:
    class_name: str
    rid: Rid
    attribute: str
    values: tuple

    def to_json(self) -> dict[str, Any]:
        return {
            "class": self.class_name,
            "rid": str(self.rid),
            "attribute": self.attribute,
            "values": [encode_value(v) for v in self.values],
        }


@dataclass
class LinkReport:
    converted: int = 0
    absent: int = 0
    dangling: list[DanglingIncident] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "converted": self.converted,
            "absent": self.absent,
            "dangling": [d.to_json() for d in self.dangling],
        }


def convert_links(wh: Warehouse, cat: KeyCatalog, strict: bool = True) -> LinkReport:
    """Replace each resolvable foreign-key couple group by one reference couple.

    A composite key collapses into a single couple named after its first
    attribute. Records missing any key attribute are left alone and counted
    as absent links. Couples that already hold a reference are skipped, so a
    second run is a no-op. In strict mode an unresolvable key raises
    DanglingLinkError before anything is modified; in lenient mode the key
    couples are dropped and the incident reported.
    """
    report = LinkReport()
    plan: list[tuple[LinkSpec, Any, Rid | None, tuple]] = []

    for spec in cat.links:
        cls = wh.get_class(spec.class_name)
        first = spec.attributes[0]
        for rec in cls.records:
            if isinstance(rec.get(first), Rid):
                continue
            if not all(a in rec.couples for a in spec.attributes):
                report.absent += 1
                continue
            values = tuple(rec.couples[a] for a in spec.attributes)
            target = cat.lookup(spec.target_db, spec.target_table, values)
            if target is None and strict:
                raise DanglingLinkError(spec.class_name, rec.rid, first, values)
            plan.append((spec, rec, target, values))

    for spec, rec, target, values in plan:
        if target is None:
            for a in spec.attributes:
                del rec.couples[a]
            report.dangling.append(DanglingIncident(spec.class_name, rec.rid, spec.attributes[0], values))
            continue
        rest = set(spec.attributes[1:])
        rec.couples = {
            a: (target if a == spec.attributes[0] else v)
            for a, v in rec.couples.items()
            if a not in rest
        }
        report.converted += 1
    return report


@dataclass(frozen=True)
class BrokenReference:
    class_name: str
    rid: Rid
    attribute: str
    reference: Rid

    def describe(self) -> str:
        return f"{self.class_name} {self.rid} {self.attribute} -> {self.reference} does not resolve"


@dataclass
class IntegrityReport:
    broken: list[BrokenReference] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.broken

    def __len__(self) -> int:
        return len(self.broken)


def check_referential_integrity(wh: Warehouse) -> IntegrityReport:
    report = IntegrityReport()
    for rec in wh.records():
        for attr, value in rec.couples.items():
            for ref in iter_references(value):
                try:
                    get_record(wh, ref)
                except NotFoundError:
                    report.broken.append(BrokenReference(rec.class_name, rec.rid, attr, ref))
    return report


def target_class(spec: LinkSpec) -> str:
    return class_name_for(spec.target_db, spec.target_table)
