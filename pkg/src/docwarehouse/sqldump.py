"""Parser for a small, documented subset of SQL dump files.

Supported statements::

    CREATE TABLE [IF NOT EXISTS] name ( coldef | tablecon , ... ) [options] ;
    INSERT INTO name [ ( col, ... ) ] VALUES ( lit, ... ) [, ( ... )]* ;
    SET ... ;   USE ... ;   DROP TABLE IF EXISTS ... ;
    LOCK TABLES ... ;   UNLOCK TABLES ;   BEGIN ;   COMMIT ;   START TRANSACTION ;

Only CREATE TABLE and INSERT have an effect; the other listed statements
are skipped. Comments (``--``, ``#``, ``/* */``) are ignored. Keywords are
case-insensitive, identifiers may be bare, backquoted or double-quoted and
strings are single-quoted with ``''`` escaping. MySQL table options
(``ENGINE=``, ``AUTO_INCREMENT=`` ...) and column attributes that carry no
meaning for ingestion (``AUTO_INCREMENT``, ``UNSIGNED``, ``DEFAULT``,
``COMMENT``, ``UNIQUE``, ``KEY``/``INDEX`` clauses) are accepted and dropped.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import (
    InvariantViolationError,
    MissingFileError,
    ParseError,
    UnsupportedStatementError,
)
from .relmodel import (
    Column,
    ForeignKey,
    RelationalDatabase,
    Row,
    Scalar,
    Table,
    check_database,
    sanitize_identifier,
)

TYPE_NAMES = {
    "text": "text", "char": "text", "varchar": "text", "character": "text", "nchar": "text",
    "nvarchar": "text", "tinytext": "text", "mediumtext": "text", "longtext": "text",
    "clob": "text", "string": "text", "enum": "text",
    "int": "integer", "integer": "integer", "smallint": "integer", "bigint": "integer",
    "tinyint": "integer", "mediumint": "integer", "serial": "integer", "bigserial": "integer",
    "int2": "integer", "int4": "integer", "int8": "integer",
    "real": "real", "float": "real", "double": "real", "decimal": "real", "numeric": "real",
    "dec": "real", "float4": "real", "float8": "real",
    "boolean": "boolean", "bool": "boolean",
    "date": "date",
}

# statements skipped wholesale, keyed by their leading keyword(s)
_IGNORED = {("SET",), ("USE",), ("LOCK", "TABLES"), ("UNLOCK", "TABLES"), ("BEGIN",),
            ("COMMIT",), ("START", "TRANSACTION")}

_REFERENTIAL_ACTIONS = {"CASCADE", "RESTRICT", "SET", "NULL", "DEFAULT", "NO", "ACTION"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | qident | number | string | punct | eof
    text: str
    line: int
    col: int

    @property
    def upper(self) -> str:
        return self.text.upper() if self.kind == "ident" else ""


def tokenize(text: str) -> Iterator[Token]:
    i, line, line_start = 0, 1, 0
    n = len(text)

    def pos() -> tuple[int, int]:
        return line, i - line_start + 1

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line, line_start = line + 1, i
            continue
        if ch.isspace():
            i += 1
            continue
        if text.startswith("--", i) or ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            ln, cl = pos()
            end = text.find("*/", i + 2)
            if end < 0:
                raise ParseError("unterminated comment", ln, cl, "*/")
            chunk = text[i:end + 2]
            line += chunk.count("\n")
            if "\n" in chunk:
                line_start = i + chunk.rindex("\n") + 1
            i = end + 2
            continue
        ln, cl = pos()
        if ch == "'":
            buf = []
            i += 1
            while True:
                if i >= n:
                    raise ParseError("unterminated string literal", ln, cl, "closing quote")
                c = text[i]
                if c == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        buf.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                if c == "\n":
                    line, line_start = line + 1, i + 1
                buf.append(c)
                i += 1
            yield Token("string", "".join(buf), ln, cl)
            continue
        if ch in "`\"":
            end = text.find(ch, i + 1)
            if end < 0 or "\n" in text[i + 1:end]:
                raise ParseError("unterminated quoted identifier", ln, cl, f"closing {ch}")
            yield Token("qident", text[i + 1:end], ln, cl)
            i = end + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            yield Token("number", text[i:j], ln, cl)
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_$"):
                j += 1
            yield Token("ident", text[i:j], ln, cl)
            i = j
            continue
        if ch in "(),;.=+-*/<>!%@:?&|^~[]{}":
            yield Token("punct", ch, ln, cl)
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", ln, cl)
    yield Token("eof", "", line, i - line_start + 1)


@dataclass
class _TableDraft:
    raw_name: str
    name: str
    columns: list[Column]
    primary_key: list[str]
    foreign_keys: list[tuple[list[str], str, list[str] | None, int]]
    rows: list[Row]
    line: int


class _Parser:
    def __init__(self, text: str, path: str | None):
        try:
            self.tokens = list(tokenize(text))
        except ParseError as exc:
            if path is None:
                raise
            raise ParseError(exc.reason, exc.line, exc.column, exc.expected, path) from None
        self.i = 0
        self.path = path
        self.tables: dict[str, _TableDraft] = {}

    # -- token helpers --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def error(self, message: str, expected: str | None = None, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(f"{message}, found {found}", tok.line, tok.col, expected, path=self.path)

    def at_keyword(self, *words: str) -> bool:
        for k, w in enumerate(words):
            tok = self.tokens[min(self.i + k, len(self.tokens) - 1)]
            if tok.upper != w:
                return False
        return True

    def keyword(self, *words: str) -> None:
        for w in words:
            if self.tok.upper != w:
                raise self.error("unexpected token", w)
            self.advance()

    def accept(self, *words: str) -> bool:
        if self.at_keyword(*words):
            for _ in words:
                self.advance()
            return True
        return False

    def punct(self, ch: str) -> None:
        if not (self.tok.kind == "punct" and self.tok.text == ch):
            raise self.error("unexpected token", repr(ch))
        self.advance()

    def at_punct(self, ch: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == ch

    def name(self) -> str:
        if self.tok.kind not in ("ident", "qident") or not self.tok.text:
            raise self.error("unexpected token", "identifier")
        return self.advance().text

    def qualified_name(self) -> str:
        parts = [self.name()]
        while self.at_punct("."):
            self.advance()
            parts.append(self.name())
        return parts[-1]

    def name_list(self) -> list[str]:
        self.punct("(")
        names = [self.name()]
        while self.at_punct(","):
            self.advance()
            names.append(self.name())
        self.punct(")")
        return names

    def skip_balanced(self) -> None:
        self.punct("(")
        depth = 1
        while depth:
            tok = self.advance()
            if tok.kind == "eof":
                raise self.error("unbalanced parentheses", "')'", tok)
            if tok.kind == "punct" and tok.text == "(":
                depth += 1
            elif tok.kind == "punct" and tok.text == ")":
                depth -= 1

    def skip_statement(self) -> None:
        while not self.at_punct(";"):
            if self.tok.kind == "eof":
                raise self.error("unterminated statement", "';'")
            self.advance()
        self.advance()

    # -- statements -----------------------------------------------------------

    def parse(self) -> None:
        while self.tok.kind != "eof":
            if self.at_punct(";"):
                self.advance()
                continue
            start = self.tok
            if start.kind != "ident":
                raise self.error("unexpected token", "statement keyword")
            if self.at_keyword("CREATE", "TABLE"):
                self.create_table()
            elif self.at_keyword("INSERT", "INTO"):
                self.insert()
            elif self.at_keyword("DROP", "TABLE", "IF", "EXISTS"):
                self.skip_statement()
            elif any(self.at_keyword(*words) for words in _IGNORED):
                self.skip_statement()
            else:
                words = [start.upper]
                nxt = self.tokens[self.i + 1]
                if nxt.kind == "ident":
                    words.append(nxt.upper)
                raise UnsupportedStatementError(" ".join(words), line=start.line, path=self.path)

    def create_table(self) -> None:
        start = self.tok
        self.keyword("CREATE", "TABLE")
        self.accept("IF", "NOT", "EXISTS")
        raw = self.qualified_name()
        name = sanitize_identifier(raw)
        if name in self.tables:
            raise InvariantViolationError(f"table {name!r} defined twice", path=self.path, line=start.line)
        draft = _TableDraft(raw, name, [], [], [], [], start.line)
        self.punct("(")
        while True:
            self.table_item(draft)
            if self.at_punct(","):
                self.advance()
                continue
            self.punct(")")
            break
        # table options up to the terminator
        self.skip_statement()
        if not draft.primary_key:
            raise InvariantViolationError(f"table {name!r} has no primary key", path=self.path, line=start.line)
        self.tables[name] = draft

    def table_item(self, draft: _TableDraft) -> None:
        if self.accept("CONSTRAINT"):
            self.name()
        tok = self.tok
        if self.accept("PRIMARY", "KEY"):
            if draft.primary_key:
                raise InvariantViolationError(
                    f"table {draft.name!r} declares two primary keys", path=self.path, line=tok.line
                )
            draft.primary_key = [sanitize_identifier(n) for n in self.name_list()]
            return
        if self.accept("FOREIGN", "KEY"):
            if self.tok.kind in ("ident", "qident") and not self.at_punct("("):
                self.name()
            cols = [sanitize_identifier(n) for n in self.name_list()]
            ref, ref_cols = self.references()
            draft.foreign_keys.append((cols, ref, ref_cols, tok.line))
            return
        if self.at_keyword("UNIQUE") or self.at_keyword("KEY") or self.at_keyword("INDEX") \
                or self.at_keyword("FULLTEXT"):
            self.advance()
            if not self.accept("KEY"):
                self.accept("INDEX")
            if not self.at_punct("("):
                self.name()
            self.skip_balanced()
            return
        if self.at_keyword("CHECK"):
            self.advance()
            self.skip_balanced()
            return
        self.column_def(draft)

    def references(self) -> tuple[str, list[str] | None]:
        self.keyword("REFERENCES")
        ref = sanitize_identifier(self.qualified_name())
        ref_cols = None
        if self.at_punct("("):
            ref_cols = [sanitize_identifier(n) for n in self.name_list()]
        while self.at_keyword("ON") or self.at_keyword("MATCH"):
            self.advance()
            self.advance()  # DELETE / UPDATE / FULL / SIMPLE
            while self.tok.upper in _REFERENTIAL_ACTIONS:
                self.advance()
        return ref, ref_cols

    def column_def(self, draft: _TableDraft) -> None:
        start = self.tok
        cname = sanitize_identifier(self.name())
        type_tok = self.tok
        if type_tok.kind != "ident":
            raise self.error("unexpected token", "column type")
        type_name = self.advance().text.lower()
        if type_name == "double":
            self.accept("PRECISION")
        elif type_name == "character":
            self.accept("VARYING")
        data_type = TYPE_NAMES.get(type_name)
        if data_type is None:
            raise self.error(f"unsupported column type {type_tok.text!r}", "a supported column type", type_tok)
        if self.at_punct("("):
            self.skip_balanced()
        nullable = True
        while not (self.at_punct(",") or self.at_punct(")")):
            tok = self.tok
            if self.accept("NOT", "NULL"):
                nullable = False
            elif self.accept("NULL"):
                pass
            elif self.accept("PRIMARY", "KEY"):
                if draft.primary_key:
                    raise InvariantViolationError(
                        f"table {draft.name!r} declares two primary keys", path=self.path, line=tok.line
                    )
                draft.primary_key = [cname]
            elif self.at_keyword("REFERENCES"):
                ref, ref_cols = self.references()
                draft.foreign_keys.append(([cname], ref, ref_cols, tok.line))
            elif self.accept("DEFAULT"):
                if self.at_punct("("):
                    self.skip_balanced()
                else:
                    self.literal()
            elif self.accept("COMMENT"):
                self.literal()
            elif self.accept("CHARACTER", "SET") or self.accept("CHARSET") or self.accept("COLLATE"):
                self.name()
            elif self.accept("CHECK"):
                self.skip_balanced()
            elif self.tok.upper in ("AUTO_INCREMENT", "AUTOINCREMENT", "UNSIGNED", "SIGNED",
                                    "ZEROFILL", "UNIQUE", "KEY"):
                self.advance()
            elif self.accept("CONSTRAINT"):
                self.name()
            else:
                raise self.error(f"unexpected token in definition of column {start.text!r}",
                                 "column constraint, ',' or ')'")
        if any(c.name == cname for c in draft.columns):
            raise InvariantViolationError(
                f"duplicate column {draft.name}.{cname}", path=self.path, line=start.line
            )
        draft.columns.append(Column(cname, data_type, nullable))

    def literal(self) -> tuple[str, object, Token]:
        """Return (kind, value, token) for one literal; kind is null|bool|int|real|string|date."""
        tok = self.tok
        sign = ""
        if self.at_punct("-") or self.at_punct("+"):
            sign = self.advance().text
            if self.tok.kind != "number":
                raise self.error("unexpected token", "number")
        if self.tok.kind == "number":
            text = sign + self.advance().text
            if any(c in text for c in ".eE"):
                return "real", float(text), tok
            return "int", int(text), tok
        if self.tok.kind == "string":
            return "string", self.advance().text, tok
        if self.accept("NULL"):
            return "null", None, tok
        if self.accept("TRUE"):
            return "bool", True, tok
        if self.accept("FALSE"):
            return "bool", False, tok
        if self.at_keyword("DATE") and self.tokens[self.i + 1].kind == "string":
            self.advance()
            return "date", self.advance().text, tok
        raise self.error("unexpected token", "literal value")

    def insert(self) -> None:
        start = self.tok
        self.keyword("INSERT", "INTO")
        name = sanitize_identifier(self.qualified_name())
        draft = self.tables.get(name)
        if draft is None:
            raise InvariantViolationError(
                f"INSERT into undefined table {name!r}", path=self.path, line=start.line
            )
        colnames = [c.name for c in draft.columns]
        if self.at_punct("("):
            targets = [sanitize_identifier(n) for n in self.name_list()]
            for t in targets:
                if t not in colnames:
                    raise InvariantViolationError(
                        f"INSERT names unknown column {name}.{t}", path=self.path, line=start.line
                    )
            if len(set(targets)) != len(targets):
                raise InvariantViolationError("INSERT repeats a column", path=self.path, line=start.line)
        else:
            targets = colnames
        self.keyword("VALUES")
        while True:
            tuple_tok = self.tok
            self.punct("(")
            lits = [self.literal()]
            while self.at_punct(","):
                self.advance()
                lits.append(self.literal())
            self.punct(")")
            if len(lits) != len(targets):
                raise InvariantViolationError(
                    f"INSERT tuple has {len(lits)} values for {len(targets)} columns",
                    path=self.path, line=tuple_tok.line,
                )
            values: dict[str, Scalar] = {c: None for c in colnames}
            for target, (kind, value, tok) in zip(targets, lits):
                col = next(c for c in draft.columns if c.name == target)
                values[target] = self.convert(kind, value, col, tok)
            draft.rows.append(Row(values))
            if self.at_punct(","):
                self.advance()
                continue
            break
        self.punct(";")

    def convert(self, kind: str, value, col: Column, tok: Token) -> Scalar:
        t = col.data_type
        if kind == "null":
            return None
        ok = (
            (t == "text" and kind == "string")
            or (t == "integer" and kind == "int")
            or (t == "real" and kind in ("int", "real"))
            or (t == "boolean" and kind == "bool")
            or (t == "date" and kind in ("string", "date"))
        )
        if t == "boolean" and kind == "int" and value in (0, 1):
            return bool(value)
        if not ok:
            raise InvariantViolationError(
                f"value {value!r} does not fit column {col.name!r} of type {t}",
                path=self.path, line=tok.line,
            )
        if t == "real":
            return float(value)
        if t == "date":
            try:
                return dt.date.fromisoformat(value)
            except ValueError:
                raise InvariantViolationError(
                    f"invalid ISO-8601 date {value!r}", path=self.path, line=tok.line
                ) from None
        return value

    # -- assembly -------------------------------------------------------------

    def build(self, db_name: str) -> RelationalDatabase:
        tables = []
        for draft in self.tables.values():
            fks = []
            for cols, ref, ref_cols, line in draft.foreign_keys:
                target = self.tables.get(ref)
                if target is None:
                    raise InvariantViolationError(
                        f"foreign key of {draft.name!r} references unknown table {ref!r}",
                        path=self.path, line=line,
                    )
                fks.append(ForeignKey(tuple(cols), ref, tuple(ref_cols or target.primary_key)))
            tables.append(
                Table(draft.name, tuple(draft.columns), tuple(draft.primary_key), tuple(fks),
                      tuple(draft.rows))
            )
        db = RelationalDatabase(sanitize_identifier(db_name), tuple(tables))
        check_database(db, self.path)
        return db


def parse_sql_dump(text: str, db_name: str, path: str | None = None) -> RelationalDatabase:
    """Build a database from SQL dump text; ``path`` only labels error messages."""
    parser = _Parser(text, path)
    parser.parse()
    return parser.build(db_name)


def load_sql_dump(path: str | Path, db_name: str) -> RelationalDatabase:
    p = Path(path)
    if not p.is_file():
        raise MissingFileError("SQL dump not found", path=str(p))
    return parse_sql_dump(p.read_text(encoding="utf-8"), db_name, path=str(p))
