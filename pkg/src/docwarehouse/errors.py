"""Exception hierarchy shared by every stage of the ingestion pipeline."""

from __future__ import annotations


class WarehouseError(Exception):
    """Base class for all errors raised by docwarehouse."""


# -- loading relational sources ---------------------------------------------


class SourceError(WarehouseError):
    """An error tied to a location in a source file."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")


class MissingFileError(SourceError):
    pass


class SchemaSyntaxError(SourceError):
    pass


class DataSyntaxError(SourceError):
    pass


class InvariantViolationError(SourceError):
    pass


class ParseError(SourceError):
    """Malformed SQL dump text; carries the position and what was expected."""

    def __init__(self, message: str, line: int, column: int, expected: str | None = None,
                 path: str | None = None):
        self.column = column
        self.expected = expected
        self.reason = message
        text = f"column {column}: {message}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text, path=path, line=line)


class UnsupportedStatementError(SourceError):
    def __init__(self, statement: str, line: int | None = None, path: str | None = None):
        self.statement = statement
        super().__init__(f"unsupported statement: {statement}", path=path, line=line)


# -- document warehouse ------------------------------------------------------


class DuplicateClassError(WarehouseError):
    pass


class DuplicateAttributeError(WarehouseError):
    pass


class NotFoundError(WarehouseError, LookupError):
    pass


class FormatError(WarehouseError):
    pass


class StoreIOError(WarehouseError, OSError):
    pass


# -- pipeline passes ---------------------------------------------------------


class DuplicateDatabaseNameError(WarehouseError):
    pass


class SourceValidationError(WarehouseError):
    """Source databases carry integrity findings and the link policy is strict."""

    def __init__(self, findings: list[str]):
        self.findings = findings
        super().__init__(f"{len(findings)} validation finding(s): " + "; ".join(findings[:5]))


class DanglingLinkError(WarehouseError):
    def __init__(self, class_name: str, rid: object, attribute: str, values: tuple):
        self.class_name = class_name
        self.rid = rid
        self.attribute = attribute
        self.values = values
        super().__init__(
            f"dangling link in {class_name} record {rid}: "
            f"{attribute}={list(values)!r} has no target record"
        )


class UnknownClassError(WarehouseError):
    pass


class UnknownAttributeError(WarehouseError):
    pass


class OverlappingGroupsError(WarehouseError):
    pass


class MissingMatchKeyError(WarehouseError):
    def __init__(self, class_name: str, rid: object, match_key: str):
        self.class_name = class_name
        self.rid = rid
        self.match_key = match_key
        super().__init__(f"{class_name} record {rid} has no value for match key {match_key!r}")
