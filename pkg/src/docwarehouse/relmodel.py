"""Relational source model: schema + extension of one database, plus the
snapshot-directory loader/writer and the pre-ingestion validator.

A snapshot directory looks like::

    schema.json
    data/<table>.jsonl     # one JSON object per row, keys are column names

SQL dumps are handled by :mod:`docwarehouse.sqldump`.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Union

from .errors import (
    DataSyntaxError,
    InvariantViolationError,
    MissingFileError,
    SchemaSyntaxError,
)

Scalar = Union[None, str, int, float, bool, dt.date]

DATA_TYPES = ("text", "integer", "real", "boolean", "date")

_NON_IDENT = re.compile(r"[^A-Za-z0-9_]")
_KEY_SEP = "\x1f"


def sanitize_identifier(name: str) -> str:
    """Map every character outside ``[A-Za-z0-9_]`` to ``_``."""
    if not isinstance(name, str) or not name:
        raise ValueError(f"identifier must be a non-empty string, got {name!r}")
    return _NON_IDENT.sub("_", name)


def scalar_type(value: Scalar) -> str | None:
    """Return the data type tag of a scalar, or None for null."""
    if value is None:
        return None
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "real"
    if isinstance(value, str):
        return "text"
    if isinstance(value, dt.date) and not isinstance(value, dt.datetime):
        return "date"
    raise TypeError(f"not a scalar value: {value!r}")


def canonical_scalar(value: Scalar) -> str:
    """Type-tagged rendering used for key encoding; distinct scalars never collide."""
    kind = scalar_type(value)
    if kind is None:
        return "n:"
    if kind == "text":
        text = value.replace("\\", "\\\\").replace(_KEY_SEP, "\\x1f")
        return "s:" + text
    if kind == "boolean":
        return "b:" + ("true" if value else "false")
    if kind == "integer":
        return "i:" + str(value)
    if kind == "real":
        return "r:" + repr(value)
    return "d:" + value.isoformat()


def encode_key(values: Iterable[Scalar]) -> str:
    """Encode a (possibly composite) key tuple as one collision-safe string."""
    return _KEY_SEP.join(canonical_scalar(v) for v in values)


def coerce_scalar(value: Any, data_type: str) -> Scalar:
    """Convert a JSON-decoded value to the scalar representation of ``data_type``.

    Raises ValueError when the value does not fit the type.
    """
    if value is None:
        return None
    if data_type == "text":
        if isinstance(value, str):
            return value
    elif data_type == "integer":
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif data_type == "real":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if isinstance(value, float) and not math.isfinite(value):
                raise ValueError(f"non-finite real {value!r}")
            return float(value)
    elif data_type == "boolean":
        if isinstance(value, bool):
            return value
    elif data_type == "date":
        if isinstance(value, dt.date) and not isinstance(value, dt.datetime):
            return value
        if isinstance(value, str):
            try:
                return dt.date.fromisoformat(value)
            except ValueError:
                raise ValueError(f"invalid ISO-8601 date {value!r}") from None
    else:
        raise ValueError(f"unknown data type {data_type!r}")
    raise ValueError(f"{value!r} is not a valid {data_type} value")


def scalar_to_json(value: Scalar) -> Any:
    if isinstance(value, dt.date):
        return value.isoformat()
    return value


@dataclass(frozen=True)
class Column:
    name: str
    data_type: str
    nullable: bool = True


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    ref_table: str
    ref_columns: tuple[str, ...]


@dataclass(frozen=True)
class Row:
    values: dict[str, Scalar]

    def __getitem__(self, column: str) -> Scalar:
        return self.values[column]

    def key(self, columns: Iterable[str]) -> tuple[Scalar, ...]:
        return tuple(self.values[c] for c in columns)


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    primary_key: tuple[str, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()
    rows: tuple[Row, ...] = ()

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)


@dataclass(frozen=True)
class RelationalDatabase:
    name: str
    tables: tuple[Table, ...] = ()

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def row_count(self) -> int:
        return sum(len(t.rows) for t in self.tables)


# -- invariant checks ----------------------------------------------------------


def check_schema(db: RelationalDatabase, path: str | None = None) -> None:
    """Raise InvariantViolationError if the schema part of ``db`` is inconsistent."""

    def fail(msg: str) -> None:
        raise InvariantViolationError(msg, path=path)

    if not db.name or _NON_IDENT.search(db.name):
        fail(f"invalid database name {db.name!r}")
    tables = {}
    for table in db.tables:
        if table.name in tables:
            fail(f"duplicate table {table.name!r}")
        tables[table.name] = table
    for table in db.tables:
        names = set()
        for col in table.columns:
            if col.name in names:
                fail(f"duplicate column {table.name}.{col.name}")
            if col.data_type not in DATA_TYPES:
                fail(f"column {table.name}.{col.name} has unknown type {col.data_type!r}")
            names.add(col.name)
        if not table.primary_key:
            fail(f"table {table.name!r} has no primary key")
        if len(set(table.primary_key)) != len(table.primary_key):
            fail(f"table {table.name!r} repeats a primary key column")
        for c in table.primary_key:
            if c not in names:
                fail(f"primary key column {table.name}.{c} does not exist")
        for fk in table.foreign_keys:
            if not fk.columns or len(fk.columns) != len(fk.ref_columns):
                fail(f"foreign key {table.name}{list(fk.columns)} has mismatched arity")
            for c in fk.columns:
                if c not in names:
                    fail(f"foreign key column {table.name}.{c} does not exist")
            target = tables.get(fk.ref_table)
            if target is None:
                fail(f"foreign key of {table.name!r} references unknown table {fk.ref_table!r}")
            if tuple(fk.ref_columns) != tuple(target.primary_key):
                fail(
                    f"foreign key {table.name}{list(fk.columns)} must reference the primary key "
                    f"{list(target.primary_key)} of {fk.ref_table!r}"
                )


def check_row(table: Table, row: Row) -> str | None:
    """Return a description of the first invariant ``row`` breaks, else None."""
    if set(row.values) != set(table.column_names):
        return f"row columns {sorted(row.values)} do not match table columns"
    pk = set(table.primary_key)
    for col in table.columns:
        value = row.values[col.name]
        if value is None:
            if not col.nullable or col.name in pk:
                return f"column {col.name!r} may not be null"
            continue
        if scalar_type(value) != col.data_type:
            return f"column {col.name!r} expects {col.data_type}, got {value!r}"
    return None


def check_database(db: RelationalDatabase, path: str | None = None) -> None:
    """Check every type invariant, including primary-key uniqueness."""
    check_schema(db, path)
    for table in db.tables:
        seen: set[str] = set()
        for i, row in enumerate(table.rows):
            problem = check_row(table, row)
            if problem:
                raise InvariantViolationError(f"{table.name} row {i}: {problem}", path=path)
            key = encode_key(row.key(table.primary_key))
            if key in seen:
                raise InvariantViolationError(
                    f"{table.name} row {i}: duplicate primary key {list(row.key(table.primary_key))}",
                    path=path,
                )
            seen.add(key)


# -- validation report ---------------------------------------------------------


@dataclass(frozen=True)
class DuplicateKeyFinding:
    table: str
    key: tuple[Scalar, ...]
    rows: tuple[int, ...]

    def describe(self) -> str:
        return f"duplicate key: {self.table} {list(self.key)} at rows {list(self.rows)}"


@dataclass(frozen=True)
class DanglingLinkFinding:
    table: str
    row: int
    columns: tuple[str, ...]
    values: tuple[Scalar, ...]
    ref_table: str

    def describe(self) -> str:
        return (
            f"dangling link: {self.table} row {self.row} {list(self.columns)}={list(self.values)} "
            f"-> {self.ref_table}"
        )


@dataclass(frozen=True)
class PartialNullLinkFinding:
    table: str
    row: int
    columns: tuple[str, ...]
    values: tuple[Scalar, ...]

    def describe(self) -> str:
        return f"partially null link: {self.table} row {self.row} {list(self.columns)}={list(self.values)}"


@dataclass
class ValidationReport:
    database: str
    findings: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.findings

    def __len__(self) -> int:
        return len(self.findings)

    def lines(self) -> list[str]:
        return [f"{self.database}: {f.describe()}" for f in self.findings]


def validate_database(db: RelationalDatabase) -> ValidationReport:
    """Report duplicate primary keys and foreign-key values with no target row."""
    report = ValidationReport(db.name)
    pk_index: dict[str, set[str]] = {}
    for table in db.tables:
        groups: dict[str, list[int]] = {}
        for i, row in enumerate(table.rows):
            groups.setdefault(encode_key(row.key(table.primary_key)), []).append(i)
        pk_index[table.name] = set(groups)
        for rows in groups.values():
            if len(rows) > 1:
                key = table.rows[rows[0]].key(table.primary_key)
                report.findings.append(DuplicateKeyFinding(table.name, key, tuple(rows)))
    for table in db.tables:
        for fk in table.foreign_keys:
            targets = pk_index.get(fk.ref_table, set())
            for i, row in enumerate(table.rows):
                values = row.key(fk.columns)
                nulls = sum(v is None for v in values)
                if nulls == len(values):
                    continue
                if nulls:
                    report.findings.append(PartialNullLinkFinding(table.name, i, fk.columns, values))
                elif encode_key(values) not in targets:
                    report.findings.append(
                        DanglingLinkFinding(table.name, i, fk.columns, values, fk.ref_table)
                    )
    return report


# -- snapshot directories -----------------------------------------------------


def _schema_error(path: Path, msg: str) -> SchemaSyntaxError:
    return SchemaSyntaxError(msg, path=str(path))


def _str_list(obj: Any, what: str, path: Path) -> tuple[str, ...]:
    if not isinstance(obj, list) or not all(isinstance(x, str) and x for x in obj):
        raise _schema_error(path, f"{what} must be a list of non-empty strings")
    return tuple(sanitize_identifier(x) for x in obj)


def _parse_schema(doc: Any, path: Path) -> tuple[str, list[dict]]:
    if not isinstance(doc, dict):
        raise _schema_error(path, "top level must be an object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise _schema_error(path, "'name' must be a non-empty string")
    tables = doc.get("tables", [])
    if not isinstance(tables, list):
        raise _schema_error(path, "'tables' must be a list")
    parsed = []
    for t in tables:
        if not isinstance(t, dict) or not isinstance(t.get("name"), str) or not t["name"]:
            raise _schema_error(path, "every table needs a non-empty 'name'")
        cols = t.get("columns")
        if not isinstance(cols, list):
            raise _schema_error(path, f"table {t['name']!r}: 'columns' must be a list")
        columns = []
        for c in cols:
            if not isinstance(c, dict) or not isinstance(c.get("name"), str) or not c["name"]:
                raise _schema_error(path, f"table {t['name']!r}: column needs a non-empty 'name'")
            kind = c.get("type")
            if kind not in DATA_TYPES:
                raise _schema_error(path, f"column {t['name']}.{c['name']}: bad type {kind!r}")
            nullable = c.get("nullable", True)
            if not isinstance(nullable, bool):
                raise _schema_error(path, f"column {t['name']}.{c['name']}: 'nullable' must be a bool")
            columns.append(Column(sanitize_identifier(c["name"]), kind, nullable))
        fks = []
        for fk in t.get("foreignKeys", []):
            if not isinstance(fk, dict) or not isinstance(fk.get("refTable"), str):
                raise _schema_error(path, f"table {t['name']!r}: malformed foreign key")
            fks.append(
                ForeignKey(
                    _str_list(fk.get("columns"), "foreignKeys.columns", path),
                    sanitize_identifier(fk["refTable"]),
                    _str_list(fk.get("refColumns"), "foreignKeys.refColumns", path),
                )
            )
        parsed.append(
            {
                "raw_name": t["name"],
                "name": sanitize_identifier(t["name"]),
                "columns": tuple(columns),
                "primary_key": _str_list(t.get("primaryKey"), "primaryKey", path),
                "foreign_keys": tuple(fks),
            }
        )
    return sanitize_identifier(name), parsed


def load_snapshot(directory: str | Path) -> RelationalDatabase:
    """Load a database from a snapshot directory (``schema.json`` + ``data/*.jsonl``)."""
    root = Path(directory)
    schema_path = root / "schema.json"
    if not schema_path.is_file():
        raise MissingFileError("schema.json not found", path=str(schema_path))
    try:
        doc = json.loads(schema_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaSyntaxError(exc.msg, path=str(schema_path), line=exc.lineno) from None
    name, specs = _parse_schema(doc, schema_path)

    shell = RelationalDatabase(
        name,
        tuple(Table(s["name"], s["columns"], s["primary_key"], s["foreign_keys"]) for s in specs),
    )
    check_schema(shell, str(schema_path))

    tables = []
    for spec, table in zip(specs, shell.tables):
        data_path = root / "data" / f"{spec['raw_name']}.jsonl"
        if not data_path.is_file():
            raise MissingFileError(f"data file for table {table.name!r} not found", path=str(data_path))
        tables.append(_load_rows(table, data_path))
    return RelationalDatabase(name, tuple(tables))


def _load_rows(table: Table, path: Path) -> Table:
    raw_names = {c.name: c for c in table.columns}
    rows = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataSyntaxError(exc.msg, path=str(path), line=lineno) from None
            if not isinstance(obj, dict):
                raise DataSyntaxError("row must be a JSON object", path=str(path), line=lineno)
            values: dict[str, Scalar] = {}
            for key, raw in obj.items():
                col = raw_names.get(sanitize_identifier(key)) if key else None
                if col is None:
                    raise InvariantViolationError(f"unknown column {key!r}", path=str(path), line=lineno)
                if col.name in values:
                    raise InvariantViolationError(f"column {key!r} given twice", path=str(path), line=lineno)
                try:
                    values[col.name] = coerce_scalar(raw, col.data_type)
                except ValueError as exc:
                    raise InvariantViolationError(
                        f"column {col.name!r}: {exc}", path=str(path), line=lineno
                    ) from None
            # absent keys are nulls
            row = Row({c.name: values.get(c.name) for c in table.columns})
            problem = check_row(table, row)
            if problem:
                raise InvariantViolationError(problem, path=str(path), line=lineno)
            key = encode_key(row.key(table.primary_key))
            if key in seen:
                raise InvariantViolationError(
                    f"duplicate primary key {list(row.key(table.primary_key))}",
                    path=str(path),
                    line=lineno,
                )
            seen.add(key)
            rows.append(row)
    return Table(table.name, table.columns, table.primary_key, table.foreign_keys, tuple(rows))


def schema_to_json(db: RelationalDatabase) -> dict:
    return {
        "name": db.name,
        "tables": [
            {
                "name": t.name,
                "columns": [
                    {"name": c.name, "type": c.data_type, "nullable": c.nullable} for c in t.columns
                ],
                "primaryKey": list(t.primary_key),
                "foreignKeys": [
                    {
                        "columns": list(fk.columns),
                        "refTable": fk.ref_table,
                        "refColumns": list(fk.ref_columns),
                    }
                    for fk in t.foreign_keys
                ],
            }
            for t in db.tables
        ],
    }


def write_snapshot(db: RelationalDatabase, directory: str | Path) -> Path:
    """Write ``db`` as a snapshot directory that :func:`load_snapshot` reads back."""
    root = Path(directory)
    (root / "data").mkdir(parents=True, exist_ok=True)
    (root / "schema.json").write_text(
        json.dumps(schema_to_json(db), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    for table in db.tables:
        with (root / "data" / f"{table.name}.jsonl").open("w", encoding="utf-8") as fh:
            for row in table.rows:
                obj = {c.name: scalar_to_json(row.values[c.name]) for c in table.columns}
                fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
    return root
