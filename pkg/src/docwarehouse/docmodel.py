"""Document-oriented warehouse: classes of identified records made of
(attribute, value) couples, with on-disk persistence.

Warehouse directory layout::

    manifest.json
    classes/<ClassName>.jsonl   # one record per line

Each record line starts with ``@rid`` and ``@class`` followed by the couples
in stored order. References serialize as ``"#cluster:position"`` strings,
dates as ISO-8601 strings. When reading back, any string of either shape is
decoded to a reference or a date respectively.
"""

from __future__ import annotations

import copy
import datetime as dt
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, NamedTuple, Union

from .errors import (
    DuplicateAttributeError,
    DuplicateClassError,
    FormatError,
    NotFoundError,
    StoreIOError,
)

_RID_RE = re.compile(r"^#([0-9]+):([0-9]+)$")
_DATE_RE = re.compile(r"^[0-9]{4}-[0-9]{2}-[0-9]{2}$")


@dataclass(frozen=True, order=True)
class Rid:
    """Record identifier ``#cluster:position``."""

    cluster: int
    position: int

    def __post_init__(self):
        for v in (self.cluster, self.position):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ValueError(f"rid components must be non-negative integers, got {v!r}")

    def __str__(self) -> str:
        return f"#{self.cluster}:{self.position}"

    @classmethod
    def parse(cls, text: str) -> "Rid":
        m = _RID_RE.match(text) if isinstance(text, str) else None
        if m is None:
            raise ValueError(f"malformed rid {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


# scalar | Rid | list of DocValue | dict attribute -> DocValue
DocValue = Union[None, str, int, float, bool, dt.date, Rid, list, dict]


class Couple(NamedTuple):
    attribute: str
    value: DocValue


@dataclass
class Record:
    rid: Rid
    class_name: str
    couples: dict[str, DocValue] = field(default_factory=dict)

    def __getitem__(self, attribute: str) -> DocValue:
        return self.couples[attribute]

    def __contains__(self, attribute: str) -> bool:
        return attribute in self.couples

    def get(self, attribute: str, default: DocValue = None) -> DocValue:
        return self.couples.get(attribute, default)

    def to_json(self, header: bool = False) -> dict[str, Any]:
        """Serializable form; ``header`` adds the constant ``@type``/``@version`` keys."""
        out: dict[str, Any] = {}
        if header:
            out["@type"] = "d"
        out["@rid"] = str(self.rid)
        if header:
            out["@version"] = 1
        out["@class"] = self.class_name
        for attr, value in self.couples.items():
            out[attr] = encode_value(value)
        return out


@dataclass
class DocClass:
    name: str
    cluster: int
    records: list[Record] = field(default_factory=list)
    # declared attribute universe; grows with every attribute a record uses
    attributes: list[str] = field(default_factory=list)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class Warehouse:
    name: str
    classes: list[DocClass] = field(default_factory=list)
    next_cluster: int = 1

    def get_class(self, name: str) -> DocClass:
        for cls in self.classes:
            if cls.name == name:
                return cls
        raise NotFoundError(f"no class named {name!r}")

    def has_class(self, name: str) -> bool:
        return any(cls.name == name for cls in self.classes)

    def class_for_cluster(self, cluster: int) -> DocClass | None:
        for cls in self.classes:
            if cls.cluster == cluster:
                return cls
        return None

    def records(self) -> Iterator[Record]:
        for cls in self.classes:
            yield from cls.records

    @property
    def record_count(self) -> int:
        return sum(len(c.records) for c in self.classes)


def create_class(wh: Warehouse, name: str, attributes: Iterable[str] = ()) -> DocClass:
    if wh.has_class(name):
        raise DuplicateClassError(f"class {name!r} already exists")
    cls = DocClass(name, wh.next_cluster, attributes=list(dict.fromkeys(attributes)))
    wh.classes.append(cls)
    wh.next_cluster += 1
    return cls


def append_record(cls: DocClass, couples: Iterable[Couple | tuple[str, DocValue]]) -> Rid:
    stored: dict[str, DocValue] = {}
    for attribute, value in couples:
        if not attribute:
            raise ValueError("couple attribute must be non-empty")
        if attribute in stored:
            raise DuplicateAttributeError(f"attribute {attribute!r} given twice for class {cls.name!r}")
        stored[attribute] = value
    rid = Rid(cls.cluster, len(cls.records))
    cls.records.append(Record(rid, cls.name, stored))
    known = set(cls.attributes)
    cls.attributes.extend(a for a in stored if a not in known)
    return rid


def get_record(wh: Warehouse, rid: Rid) -> Record:
    cls = wh.class_for_cluster(rid.cluster)
    if cls is None or rid.position >= len(cls.records):
        raise NotFoundError(f"no record {rid}")
    record = cls.records[rid.position]
    assert record.rid == rid
    return record


def iter_references(value: DocValue) -> Iterator[Rid]:
    """Yield every reference nested anywhere inside ``value``."""
    if isinstance(value, Rid):
        yield value
    elif isinstance(value, list):
        for item in value:
            yield from iter_references(item)
    elif isinstance(value, dict):
        for item in value.values():
            yield from iter_references(item)


def copy_value(value: DocValue) -> DocValue:
    return copy.deepcopy(value) if isinstance(value, (list, dict)) else value


# -- serialization --------------------------------------------------------------


def encode_value(value: DocValue) -> Any:
    if isinstance(value, Rid):
        return str(value)
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, list):
        return [encode_value(v) for v in value]
    if isinstance(value, dict):
        return {k: encode_value(v) for k, v in value.items()}
    return value


def decode_value(value: Any) -> DocValue:
    if isinstance(value, str):
        if _RID_RE.match(value):
            return Rid.parse(value)
        if _DATE_RE.match(value):
            try:
                return dt.date.fromisoformat(value)
            except ValueError:
                return value
        return value
    if isinstance(value, list):
        return [decode_value(v) for v in value]
    if isinstance(value, dict):
        return {k: decode_value(v) for k, v in value.items()}
    return value


def dumps_line(obj: dict[str, Any]) -> str:
    # key order is meaningful (couple order), so no sort_keys
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def dumps_pretty(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, allow_nan=False) + "\n"


def manifest_to_json(wh: Warehouse) -> dict[str, Any]:
    return {
        "name": wh.name,
        "classes": [
            {
                "name": c.name,
                "cluster": c.cluster,
                "file": f"classes/{c.name}.jsonl",
                "count": len(c.records),
                "attributes": list(c.attributes),
            }
            for c in wh.classes
        ],
    }


def write_warehouse(wh: Warehouse, directory: str | Path) -> Path:
    """Write the manifest and one JSONL file per class. Stale class files are removed."""
    root = Path(directory)
    try:
        (root / "classes").mkdir(parents=True, exist_ok=True)
        wanted = {f"{c.name}.jsonl" for c in wh.classes}
        for old in (root / "classes").glob("*.jsonl"):
            if old.name not in wanted:
                old.unlink()
        for cls in wh.classes:
            with (root / "classes" / f"{cls.name}.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
                for rec in cls.records:
                    fh.write(dumps_line(rec.to_json()) + "\n")
        (root / "manifest.json").write_text(dumps_pretty(manifest_to_json(wh)), encoding="utf-8")
    except OSError as exc:
        raise StoreIOError(f"cannot write warehouse to {root}: {exc}") from exc
    return root


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise FormatError(msg)


def read_manifest(directory: str | Path) -> dict[str, Any]:
    path = Path(directory) / "manifest.json"
    if not path.is_file():
        raise FormatError(f"{path}: manifest not found")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: {exc.msg}") from None
    except OSError as exc:
        raise StoreIOError(f"cannot read {path}: {exc}") from exc
    _require(isinstance(doc, dict) and isinstance(doc.get("name"), str), f"{path}: missing 'name'")
    _require(isinstance(doc.get("classes"), list), f"{path}: 'classes' must be a list")
    for entry in doc["classes"]:
        _require(
            isinstance(entry, dict)
            and isinstance(entry.get("name"), str)
            and isinstance(entry.get("cluster"), int)
            and isinstance(entry.get("file"), str)
            and isinstance(entry.get("count"), int),
            f"{path}: malformed class entry {entry!r}",
        )
    return doc


def read_warehouse(directory: str | Path) -> Warehouse:
    root = Path(directory)
    doc = read_manifest(root)
    wh = Warehouse(doc["name"])
    for entry in doc["classes"]:
        name, cluster = entry["name"], entry["cluster"]
        _require(not wh.has_class(name), f"duplicate class {name!r} in manifest")
        _require(wh.class_for_cluster(cluster) is None, f"duplicate cluster {cluster} in manifest")
        path = root / entry["file"]
        _require(path.is_file(), f"class file {entry['file']} listed in manifest is missing")
        cls = DocClass(name, cluster)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise StoreIOError(f"cannot read {path}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: {exc.msg}") from None
            _require(isinstance(obj, dict), f"{path}:{lineno}: record must be an object")
            try:
                rid = Rid.parse(obj.pop("@rid", None))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: missing or malformed @rid") from None
            _require(obj.pop("@class", None) == name, f"{path}:{lineno}: @class does not match {name!r}")
            _require(rid == Rid(cluster, len(cls.records)), f"{path}:{lineno}: unexpected rid {rid}")
            cls.records.append(Record(rid, name, {k: decode_value(v) for k, v in obj.items()}))
        _require(len(cls.records) == entry["count"], f"{path}: count does not match manifest")
        attrs = entry.get("attributes")
        if attrs is None:
            attrs = [a for rec in cls.records for a in rec.couples]
        _require(isinstance(attrs, list) and all(isinstance(a, str) for a in attrs),
                 f"{path}: malformed attribute list in manifest")
        cls.attributes = list(dict.fromkeys(attrs))
        wh.classes.append(cls)
    wh.next_cluster = max((c.cluster for c in wh.classes), default=0) + 1
    return wh
