"""Ingest relational databases into a single document-oriented warehouse.

The pipeline has three passes over one shared warehouse:

1. :func:`ingest_all` turns every table into a class (named
   ``<database>_<table>``) and every row into a record, recording which rid
   each primary key landed on in a :class:`KeyCatalog`.
2. :func:`convert_links` replaces foreign-key couples by rid references.
3. :func:`merge_classes` folds classes declared equivalent by an ontology
   into new canonical classes.
"""

from .convertlinks import LinkReport, check_referential_integrity, convert_links
from .createdw import KeyCatalog, LinkSpec, class_name_for, ingest_all, transform_database
from .docmodel import (
    Couple,
    DocClass,
    Record,
    Rid,
    Warehouse,
    append_record,
    create_class,
    get_record,
    read_warehouse,
    write_warehouse,
)
from .mergeclasses import MergeReport, Ontology, load_ontology, merge_classes, merge_records
from .pipeline import PipelineConfig, Source, run_pipeline
from .relmodel import (
    Column,
    ForeignKey,
    RelationalDatabase,
    Row,
    Table,
    load_snapshot,
    validate_database,
    write_snapshot,
)
from .sqldump import load_sql_dump, parse_sql_dump

__version__ = "0.1.0"

__all__ = [
    "Column", "Couple", "DocClass", "ForeignKey", "KeyCatalog", "LinkReport", "LinkSpec",
    "MergeReport", "Ontology", "PipelineConfig", "Record", "RelationalDatabase", "Rid", "Row",
    "Source", "Table", "Warehouse", "append_record", "check_referential_integrity",
    "class_name_for", "convert_links", "create_class", "get_record", "ingest_all",
    "load_ontology", "load_snapshot", "load_sql_dump", "merge_classes", "merge_records",
    "parse_sql_dump", "read_warehouse", "run_pipeline", "transform_database",
    "validate_database", "write_snapshot", "write_warehouse",
]
