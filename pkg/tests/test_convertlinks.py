import copy
import random

import pytest
from randomdb import random_database

from docwarehouse.convertlinks import DanglingIncident, check_referential_integrity, convert_links, target_class
from docwarehouse.createdw import ingest_all
from docwarehouse.docmodel import Rid, Warehouse, append_record, create_class, get_record
from docwarehouse.errors import DanglingLinkError
from docwarehouse.relmodel import Column, ForeignKey, RelationalDatabase, Row, Table


def clinic(doctors):
    """Patients referencing Physician; ``doctors`` gives each patient's Doctor value."""
    patients = Table(
        "Patients",
        (Column("NoPat", "text", False), Column("Doctor", "integer", True)),
        ("NoPat",),
        (ForeignKey(("Doctor",), "Physician", ("NoPhys",)),),
        tuple(Row({"NoPat": f"p{i}", "Doctor": d}) for i, d in enumerate(doctors)),
    )
    physician = Table("Physician", (Column("NoPhys", "integer", False),), ("NoPhys",), (),
                      (Row({"NoPhys": 1}), Row({"NoPhys": 2})))
    return RelationalDatabase("Analysis", (patients, physician))


def snapshot(wh):
    return [(r.rid, copy.deepcopy(r.couples)) for r in wh.records()]


def test_doctor_becomes_reference(ingested):
    wh, _, report = ingested
    rec = wh.get_class("Analysis_Patients").records[0]
    assert rec.to_json()["Doctor"] == "#3:0"
    target = get_record(wh, rec["Doctor"])
    assert target.class_name == "Analysis_Physician" and target["NoPhys"] == 1
    # 2 Spouse links plus 2 Doctor links; Hugo and Heid have none
    assert (report.converted, report.absent, report.dangling) == (4, 2, [])


def test_spouse_self_reference(ingested):
    wh, _, _ = ingested
    insured = wh.get_class("ServiceProvision_Insured").records
    assert insured[0]["Spouse"] == insured[1].rid
    assert insured[1]["Spouse"] == insured[0].rid
    assert "Spouse" not in insured[2].couples


def test_class_without_links_untouched(fixture_dbs):
    wh, cat = ingest_all(fixture_dbs, "DW")
    before = snapshot(wh)
    convert_links(wh, cat)
    after = snapshot(wh)
    physician = wh.get_class("Analysis_Physician").cluster
    assert [x for x in before if x[0].cluster == physician] == [x for x in after if x[0].cluster == physician]


def test_absent_links_leave_no_key():
    wh, cat = ingest_all([clinic([None, 1, None])], "W")
    report = convert_links(wh, cat)
    assert (report.converted, report.absent) == (1, 2)
    recs = wh.get_class("Analysis_Patients").records
    assert "Doctor" not in recs[0].couples and "Doctor" not in recs[2].couples


def test_strict_dangling_raises_without_changes():
    wh, cat = ingest_all([clinic([1, 9, 2])], "W")
    before = snapshot(wh)
    with pytest.raises(DanglingLinkError) as exc:
        convert_links(wh, cat)
    assert exc.value.values == (9,)
    assert exc.value.rid == Rid(1, 1)
    assert snapshot(wh) == before


def test_lenient_dangling_drops_couple():
    wh, cat = ingest_all([clinic([1, 9, 2])], "W")
    report = convert_links(wh, cat, strict=False)
    assert report.converted == 2
    assert report.dangling == [DanglingIncident("Analysis_Patients", Rid(1, 1), "Doctor", (9,))]
    assert report.to_json()["dangling"] == [
        {"class": "Analysis_Patients", "rid": "#1:1", "attribute": "Doctor", "values": [9]}
    ]
    assert wh.get_class("Analysis_Patients").records[1].couples == {"NoPat": "p1"}
    assert check_referential_integrity(wh).clean


def test_composite_key_collapses():
    visit = Table("Visit", (Column("pid", "integer", False), Column("seq", "integer", False)), ("pid", "seq"),
                  (), (Row({"pid": 1, "seq": 1}), Row({"pid": 1, "seq": 2})))
    note = Table(
        "Note",
        (Column("id", "integer", False), Column("vp", "integer", True), Column("vs", "integer", True),
         Column("txt", "text", True)),
        ("id",),
        (ForeignKey(("vp", "vs"), "Visit", ("pid", "seq")),),
        (Row({"id": 1, "vp": 1, "vs": 2, "txt": "a"}), Row({"id": 2, "vp": None, "vs": None, "txt": "b"})),
    )
    wh, cat = ingest_all([RelationalDatabase("H", (visit, note))], "W")
    report = convert_links(wh, cat)
    first, second = wh.get_class("H_Note").records
    assert list(first.couples) == ["id", "vp", "txt"]
    assert first["vp"] == Rid(1, 1)
    assert second.couples == {"id": 2, "txt": "b"}
    assert (report.converted, report.absent) == (1, 1)


def test_integrity_check():
    wh = Warehouse("W")
    assert check_referential_integrity(wh).clean
    cls = create_class(wh, "A")
    append_record(cls, [("self", Rid(1, 0))])
    append_record(cls, [("bad", Rid(999, 0)), ("nested", [{"x": Rid(1, 1)}])])
    report = check_referential_integrity(wh)
    assert len(report) == 1
    assert report.broken[0].describe() == "A #1:1 bad -> #999:0 does not resolve"


def test_integrity_fixture(merged):
    wh, _ = merged
    assert check_referential_integrity(wh).clean


def test_target_class(ingested):
    _, cat, _ = ingested
    assert sorted(target_class(s) for s in cat.links) == ["Analysis_Physician", "ServiceProvision_Insured"]


@pytest.mark.parametrize("seed", range(15))
def test_conversion_conserves_records(seed):
    db = random_database(random.Random(seed), "C", max_rows=60)
    wh, cat = ingest_all([db], "W")
    rids = [r.rid for r in wh.records()]
    report = convert_links(wh, cat)
    assert [r.rid for r in wh.records()] == rids
    expected = sum(len(t.rows) for t in db.tables for _ in t.foreign_keys)
    assert report.converted + report.absent == expected
    assert report.dangling == []
