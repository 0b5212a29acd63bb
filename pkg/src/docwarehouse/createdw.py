"""Build the warehouse from relational sources: one class per table, one
record per row, plus the key catalog needed to turn foreign keys into
references later on."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .docmodel import Rid, Warehouse, append_record, create_class, dumps_pretty
from .errors import DuplicateClassError, DuplicateDatabaseNameError, InvariantViolationError
from .relmodel import RelationalDatabase, Scalar, encode_key, scalar_to_json


@dataclass(frozen=True)
class LinkSpec:
    """Foreign-key couples of ``class_name`` that point at ``target_db.target_table``."""

    class_name: str
    attributes: tuple[str, ...]
    target_db: str
    target_table: str

    def to_json(self) -> dict[str, Any]:
        return {
            "class": self.class_name,
            "attributes": list(self.attributes),
            "targetDb": self.target_db,
            "targetTable": self.target_table,
        }


@dataclass
class KeyCatalog:
    """Maps (database, table, primary-key tuple) to the rid of the record built from that row."""

    entries: dict[tuple[str, str, str], Rid] = field(default_factory=dict)
    links: list[LinkSpec] = field(default_factory=list)
    pk_values: dict[tuple[str, str, str], tuple[Scalar, ...]] = field(default_factory=dict, repr=False)

    def add(self, db: str, table: str, pk: tuple[Scalar, ...], rid: Rid) -> None:
        key = (db, table, encode_key(pk))
        if key in self.entries:
            raise InvariantViolationError(f"duplicate primary key {list(pk)} in {db}.{table}")
        self.entries[key] = rid
        self.pk_values[key] = tuple(pk)

    def lookup(self, db: str, table: str, pk: Iterable[Scalar]) -> Rid | None:
        return self.entries.get((db, table, encode_key(pk)))

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> dict[str, Any]:
        return {
            "entries": [
                {
                    "db": db,
                    "table": table,
                    "pk": [scalar_to_json(v) for v in self.pk_values[(db, table, enc)]],
                    "rid": str(rid),
                }
                for (db, table, enc), rid in self.entries.items()
            ],
            "links": [spec.to_json() for spec in self.links],
        }


def class_name_for(db_name: str, table_name: str) -> str:
    return f"{db_name}_{table_name}"


def transform_database(db: RelationalDatabase, wh: Warehouse, cat: KeyCatalog) -> None:
    names = [class_name_for(db.name, t.name) for t in db.tables]
    for name in names:
        if wh.has_class(name):
            raise DuplicateClassError(
                f"class {name!r} from database {db.name!r} collides with an existing class"
            )
    if len(set(names)) != len(names):
        raise DuplicateClassError(f"database {db.name!r} yields duplicate class names")
    # reject duplicate keys before touching the warehouse
    for table in db.tables:
        keys = [encode_key(row.key(table.primary_key)) for row in table.rows]
        if len(set(keys)) != len(keys):
            raise InvariantViolationError(f"{db.name}.{table.name} has duplicate primary keys")

    for table, name in zip(db.tables, names):
        cls = create_class(wh, name, table.column_names)
        for row in table.rows:
            # nulls produce no couple; the primary key is stored like any attribute
            couples = [(c.name, row.values[c.name]) for c in table.columns if row.values[c.name] is not None]
            rid = append_record(cls, couples)
            cat.add(db.name, table.name, row.key(table.primary_key), rid)
        for fk in table.foreign_keys:
            cat.links.append(LinkSpec(name, tuple(fk.columns), db.name, fk.ref_table))


def ingest_all(dbs: Iterable[RelationalDatabase], wh_name: str) -> tuple[Warehouse, KeyCatalog]:
    """Transform every database, in order, into one fresh warehouse."""
    dbs = list(dbs)
    seen: set[str] = set()
    for db in dbs:
        if db.name in seen:
            raise DuplicateDatabaseNameError(f"database name {db.name!r} given twice")
        seen.add(db.name)
    wh = Warehouse(wh_name)
    cat = KeyCatalog()
    for db in dbs:
        transform_database(db, wh, cat)
    return wh, cat


def write_catalog(cat: KeyCatalog, directory: str | Path, conversion: dict | None = None) -> Path:
    doc = cat.to_json()
    if conversion is not None:
        doc["conversion"] = conversion
    path = Path(directory) / "catalog.json"
    path.write_text(dumps_pretty(doc), encoding="utf-8")
    return path


def read_catalog_json(directory: str | Path) -> dict[str, Any]:
    return json.loads((Path(directory) / "catalog.json").read_text(encoding="utf-8"))
