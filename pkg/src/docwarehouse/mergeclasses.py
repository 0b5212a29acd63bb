"""Merge semantically equivalent classes into new canonical classes.

An ontology file declares groups of equivalent classes::

    {"groups": [{"canonicalName": "Insured_DW",
                 "matchKey": "NoInsured",
                 "members": [{"class": "Analysis_Patients",
                              "attributeMap": {"NoPat": "NoInsured"}},
                             {"class": "ServiceProvision_Insured",
                              "attributeMap": {}}]}]}

Member order is precedence (first wins on conflicting values). Records of
all members are bucketed by their match-key value; each bucket becomes one
record of the canonical class.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .docmodel import (
    DocValue,
    Record,
    Rid,
    Warehouse,
    append_record,
    copy_value,
    create_class,
    dumps_pretty,
    encode_value,
)
from .errors import (
    DuplicateClassError,
    FormatError,
    MissingMatchKeyError,
    OverlappingGroupsError,
    UnknownAttributeError,
    UnknownClassError,
)
from .relmodel import canonical_scalar, scalar_type

_IDENT = re.compile(r"^[A-Za-z0-9_]+$")


@dataclass(frozen=True)
class MemberMapping:
    class_name: str
    attribute_map: dict[str, str] = field(default_factory=dict)

    def canonical(self, attribute: str) -> str:
        return self.attribute_map.get(attribute, attribute)

    def map_record(self, record: Record) -> dict[str, DocValue]:
        return {self.canonical(a): v for a, v in record.couples.items()}


@dataclass(frozen=True)
class EquivalenceGroup:
    canonical_name: str
    match_key: str
    members: tuple[MemberMapping, ...]


@dataclass(frozen=True)
class Ontology:
    groups: tuple[EquivalenceGroup, ...] = ()


def _parse_ontology(doc: Any, where: str) -> Ontology:
    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise FormatError(f"{where}: {msg}")

    need(isinstance(doc, dict) and isinstance(doc.get("groups"), list), "expected an object with a 'groups' list")
    groups = []
    for g in doc["groups"]:
        need(isinstance(g, dict), "group must be an object")
        name, key, members = g.get("canonicalName"), g.get("matchKey"), g.get("members")
        need(isinstance(name, str) and bool(_IDENT.match(name)), f"invalid canonicalName {name!r}")
        need(isinstance(key, str) and bool(key), f"group {name}: invalid matchKey {key!r}")
        need(isinstance(members, list) and len(members) >= 2, f"group {name}: needs at least two members")
        mapped = []
        for m in members:
            need(isinstance(m, dict) and isinstance(m.get("class"), str), f"group {name}: malformed member")
            amap = m.get("attributeMap", {})
            need(
                isinstance(amap, dict) and all(isinstance(k, str) and isinstance(v, str) and k and v
                                               for k, v in amap.items()),
                f"group {name}: attributeMap of {m['class']} must map strings to strings",
            )
            need(len(set(amap.values())) == len(amap),
                 f"group {name}: attributeMap of {m['class']} maps two attributes to one")
            mapped.append(MemberMapping(m["class"], dict(amap)))
        groups.append(EquivalenceGroup(name, key, tuple(mapped)))
    return Ontology(tuple(groups))


def validate_ontology(ont: Ontology, wh: Warehouse) -> None:
    """Check an ontology against the warehouse's classes and attributes."""
    owner: dict[str, str] = {}
    canon_names: set[str] = set()
    for group in ont.groups:
        if group.canonical_name in canon_names or wh.has_class(group.canonical_name):
            raise DuplicateClassError(f"canonical class {group.canonical_name!r} already exists")
        canon_names.add(group.canonical_name)
        for member in group.members:
            if not wh.has_class(member.class_name):
                raise UnknownClassError(f"group {group.canonical_name}: unknown class {member.class_name!r}")
            if member.class_name in owner:
                raise OverlappingGroupsError(
                    f"class {member.class_name!r} appears in groups {owner[member.class_name]!r} "
                    f"and {group.canonical_name!r}"
                )
            owner[member.class_name] = group.canonical_name
            universe = set(wh.get_class(member.class_name).attributes)
            for src in member.attribute_map:
                if src not in universe:
                    raise UnknownAttributeError(f"class {member.class_name!r} has no attribute {src!r}")
            targets = set(member.attribute_map.values())
            for attr in universe - set(member.attribute_map):
                if attr in targets:
                    raise FormatError(
                        f"class {member.class_name!r}: attribute {attr!r} clashes with a mapped attribute"
                    )
            if group.match_key not in {member.canonical(a) for a in universe}:
                raise UnknownAttributeError(
                    f"class {member.class_name!r} provides no attribute for match key {group.match_key!r}"
                )


def load_ontology(path: str | Path, wh: Warehouse) -> Ontology:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FormatError(f"{p}: ontology file not found") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{p}:{exc.lineno}: {exc.msg}") from None
    ont = _parse_ontology(doc, str(p))
    validate_ontology(ont, wh)
    return ont


# -- merging --------------------------------------------------------------------


def values_equal(a: DocValue, b: DocValue) -> bool:
    """Equality that does not conflate 1, 1.0 and True."""
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(values_equal(a[k], b[k]) for k in a)
    if isinstance(a, Rid) or isinstance(b, Rid):
        return a == b
    try:
        return scalar_type(a) == scalar_type(b) and a == b
    except TypeError:
        return False


def match_value_key(value: DocValue) -> str:
    if isinstance(value, Rid):
        return "ref:" + str(value)
    if isinstance(value, (list, dict)):
        return "json:" + json.dumps(encode_value(value), sort_keys=True)
    return canonical_scalar(value)


@dataclass(frozen=True)
class Conflict:
    entity: DocValue
    attribute: str
    kept_source: str
    kept: DocValue
    discarded: tuple[tuple[str, DocValue], ...]

    def to_json(self) -> dict[str, Any]:
        return {
            "entity": encode_value(self.entity),
            "attribute": self.attribute,
            "keptSource": self.kept_source,
            "kept": encode_value(self.kept),
            "discarded": [{"source": s, "value": encode_value(v)} for s, v in self.discarded],
        }


def merge_records(
    bucket: list[tuple[int, dict[str, DocValue]]],
    sources: list[str] | None = None,
    entity: DocValue = None,
) -> tuple[dict[str, DocValue], list[Conflict]]:
    """Combine mapped records describing one entity.

    ``bucket`` holds (precedence rank, mapped couples) pairs sorted by rank.
    Couples are unioned in order of first appearance; for an attribute given
    several times with different values the earliest (highest precedence)
    value is kept and the others are reported as a conflict.
    """
    if sources is None:
        sources = [str(rank) for rank, _ in bucket]
    merged: dict[str, DocValue] = {}
    kept_from: dict[str, str] = {}
    discarded: dict[str, list[tuple[str, DocValue]]] = {}
    for (rank, couples), source in zip(bucket, sources):
        for attr, value in couples.items():
            if attr not in merged:
                merged[attr] = copy_value(value)
                kept_from[attr] = source
            elif not values_equal(merged[attr], value):
                seen = discarded.setdefault(attr, [])
                if not any(values_equal(v, value) for _, v in seen):
                    seen.append((source, copy_value(value)))
    conflicts = [
        Conflict(entity, attr, kept_from[attr], merged[attr], tuple(lost))
        for attr, lost in discarded.items()
    ]
    return merged, conflicts


@dataclass
class GroupReport:
    canonical_name: str
    cluster: int
    merged: int = 0
    source_counts: dict[str, int] = field(default_factory=dict)
    conflicts: list[Conflict] = field(default_factory=list)
    missing_key: list[tuple[str, Rid]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "canonicalName": self.canonical_name,
            "cluster": self.cluster,
            "merged": self.merged,
            "sources": dict(self.source_counts),
            "conflicts": [c.to_json() for c in self.conflicts],
            "missingMatchKey": [{"class": c, "rid": str(r)} for c, r in self.missing_key],
        }


@dataclass
class MergeReport:
    groups: list[GroupReport] = field(default_factory=list)

    @property
    def merged(self) -> int:
        return sum(g.merged for g in self.groups)

    @property
    def conflict_count(self) -> int:
        return sum(len(g.conflicts) for g in self.groups)

    def to_json(self) -> dict[str, Any]:
        return {"groups": [g.to_json() for g in self.groups]}


def _bucket_group(wh: Warehouse, group: EquivalenceGroup, strict: bool):
    buckets: dict[str, list[tuple[int, str, dict[str, DocValue]]]] = {}
    entities: dict[str, DocValue] = {}
    missing: list[tuple[str, Rid]] = []
    counts: Counter[str] = Counter()
    for rank, member in enumerate(group.members):
        for rec in wh.get_class(member.class_name).records:
            counts[member.class_name] += 1
            mapped = member.map_record(rec)
            if group.match_key not in mapped:
                if strict:
                    raise MissingMatchKeyError(member.class_name, rec.rid, group.match_key)
                missing.append((member.class_name, rec.rid))
                key = f"missing:{rec.rid}"
                entity = None
            else:
                entity = mapped[group.match_key]
                key = match_value_key(entity)
            buckets.setdefault(key, []).append((rank, member.class_name, mapped))
            entities.setdefault(key, entity)
    return buckets, entities, missing, counts


def merge_classes(wh: Warehouse, ont: Ontology, strict: bool = True) -> MergeReport:
    """Create one canonical class per ontology group, in file order.

    Member classes are left untouched; merged records get fresh rids and
    keep reference values exactly as found in the sources. In strict mode a
    member record without a match-key value raises MissingMatchKeyError
    before any class is created; in lenient mode it becomes its own merged
    record.
    """
    plans = [(group, *_bucket_group(wh, group, strict)) for group in ont.groups]
    report = MergeReport()
    for group, buckets, entities, missing, counts in plans:
        declared = [m.canonical(a) for m in group.members for a in wh.get_class(m.class_name).attributes]
        cls = create_class(wh, group.canonical_name, declared)
        greport = GroupReport(group.canonical_name, cls.cluster, missing_key=missing)
        greport.source_counts = {m.class_name: counts[m.class_name] for m in group.members}
        for key, items in buckets.items():
            items.sort(key=lambda it: it[0])
            couples, conflicts = merge_records(
                [(rank, mapped) for rank, _, mapped in items],
                sources=[name for _, name, _ in items],
                entity=entities[key],
            )
            append_record(cls, couples.items())
            greport.conflicts.extend(conflicts)
        greport.merged = len(cls.records)
        report.groups.append(greport)
    return report


def write_merge_report(report: MergeReport, directory: str | Path) -> Path:
    path = Path(directory) / "merge_report.json"
    path.write_text(dumps_pretty(report.to_json()), encoding="utf-8")
    return path
