import json
import random

import pytest
from oracles import same_scalar
from randomdb import random_database

from docwarehouse.createdw import KeyCatalog, LinkSpec, class_name_for, ingest_all, transform_database, write_catalog
from docwarehouse.docmodel import Rid, Warehouse, get_record, write_warehouse
from docwarehouse.errors import DuplicateClassError, DuplicateDatabaseNameError, InvariantViolationError
from docwarehouse.relmodel import Column, RelationalDatabase, Row, Table


@pytest.mark.parametrize(
    "db, table, name",
    [
        ("Analysis", "Patients", "Analysis_Patients"),
        ("ServiceProvision", "Insured", "ServiceProvision_Insured"),
        ("Analysis", "Insured", "Analysis_Insured"),
    ],
)
def test_class_name_for(db, table, name):
    assert class_name_for(db, table) == name


def test_transform_empty_database():
    wh, cat = Warehouse("W"), KeyCatalog()
    transform_database(RelationalDatabase("Empty"), wh, cat)
    assert wh.classes == [] and len(cat) == 0 and cat.links == []


def test_patient_record_before_link_conversion(fixture_dbs):
    wh, cat = ingest_all(fixture_dbs, "DW")
    rec = wh.get_class("Analysis_Patients").records[0]
    assert list(rec.couples) == ["Email", "FNamePat", "LNamePat", "NoPat", "Doctor"]
    assert rec.couples == {
        "Email": "ramon.saadi@gmail.com",
        "FNamePat": "Ramon",
        "LNamePat": "Saadi",
        "NoPat": "45657709",
        "Doctor": 1,
    }


def test_service_provision_counts(fixture_dbs):
    sp = fixture_dbs[0]
    wh, cat = Warehouse("W"), KeyCatalog()
    transform_database(sp, wh, cat)
    assert [c.name for c in wh.classes] == ["ServiceProvision_Insured"]
    assert len(wh.classes[0].records) == 3
    assert len(cat) == 3
    assert cat.links == [LinkSpec("ServiceProvision_Insured", ("Spouse",), "ServiceProvision", "Insured")]
    assert cat.lookup("ServiceProvision", "Insured", ("13700008",)) == Rid(1, 1)


def test_ingest_all_order(fixture_dbs):
    wh, _ = ingest_all(fixture_dbs, "DW")
    assert [(c.name, c.cluster) for c in wh.classes] == [
        ("ServiceProvision_Insured", 1), ("Analysis_Patients", 2), ("Analysis_Physician", 3)
    ]


def test_ingest_all_empty():
    wh, cat = ingest_all([], "DW")
    assert wh == Warehouse("DW") and len(cat) == 0


def test_duplicate_database_name(fixture_dbs):
    with pytest.raises(DuplicateDatabaseNameError):
        ingest_all([fixture_dbs[1], fixture_dbs[1]], "DW")


def one_table(db, table):
    return RelationalDatabase(db, (Table(table, (Column("id", "integer", False),), ("id",)),))


def test_class_name_collision_across_databases():
    with pytest.raises(DuplicateClassError):
        ingest_all([one_table("A_B", "C"), one_table("A", "B_C")], "DW")


def test_duplicate_keys_rejected_before_mutation():
    t = Table("T", (Column("id", "integer", False),), ("id",), (), (Row({"id": 1}), Row({"id": 1})))
    wh, cat = Warehouse("W"), KeyCatalog()
    with pytest.raises(InvariantViolationError):
        transform_database(RelationalDatabase("D", (t,)), wh, cat)
    assert wh.classes == [] and len(cat) == 0


@pytest.mark.parametrize("seed", range(20))
def test_couple_fidelity_and_catalog(seed):
    db = random_database(random.Random(seed), "F", max_rows=50)
    wh, cat = ingest_all([db], "W")
    assert len(cat) == db.row_count
    for table in db.tables:
        cls = wh.get_class(f"F_{table.name}")
        assert len(cls.records) == len(table.rows)
        for row, rec in zip(table.rows, cls.records):
            expected = {c: v for c, v in row.values.items() if v is not None}
            assert set(rec.couples) == set(expected)
            assert all(same_scalar(rec.couples[c], v) for c, v in expected.items())
            assert list(rec.couples) == [c.name for c in table.columns if row.values[c.name] is not None]
            rid = cat.lookup("F", table.name, row.key(table.primary_key))
            assert get_record(wh, rid) is rec


def test_ingest_is_deterministic(tmp_path):
    db = random_database(random.Random(7), "Det")
    for run in ("a", "b"):
        wh, cat = ingest_all([db], "W")
        write_warehouse(wh, tmp_path / run)
        write_catalog(cat, tmp_path / run)
    for f in sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file()):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_catalog_json_format(fixture_dbs, tmp_path):
    _, cat = ingest_all(fixture_dbs, "DW")
    doc = json.loads(write_catalog(cat, tmp_path, conversion={"converted": 0, "absent": 0, "dangling": []})
                     .read_text())
    assert doc["entries"][0] == {"db": "ServiceProvision", "table": "Insured", "pk": ["45657709"], "rid": "#1:0"}
    assert len(doc["entries"]) == 8
    assert {"class": "Analysis_Patients", "attributes": ["Doctor"], "targetDb": "Analysis",
            "targetTable": "Physician"} in doc["links"]
    assert doc["conversion"] == {"converted": 0, "absent": 0, "dangling": []}
