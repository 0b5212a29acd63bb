"""Bundled two-database sample lake used by the tests and demos.

``ServiceProvision`` holds one ``Insured`` table, ``Analysis`` holds
``Patients`` and ``Physician``. Both are shipped as snapshot directories
and as SQL dumps; ``ontology.json`` declares insured persons and patients
equivalent.
"""

from __future__ import annotations

from pathlib import Path

FIXTURE_DIR = Path(__file__).resolve().parent

DATABASES = ("ServiceProvision", "Analysis")


def snapshot_dir(db_name: str) -> Path:
    return FIXTURE_DIR / db_name


def sql_dump(db_name: str) -> Path:
    return FIXTURE_DIR / f"{db_name}.sql"


def ontology_path() -> Path:
    return FIXTURE_DIR / "ontology.json"
