import copy
import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import find_record
from randomdb import random_merge_instance

from docwarehouse import fixtures
from docwarehouse.convertlinks import convert_links
from docwarehouse.createdw import ingest_all
from docwarehouse.docmodel import Rid, write_warehouse
from docwarehouse.errors import (
    DuplicateClassError,
    FormatError,
    MissingMatchKeyError,
    OverlappingGroupsError,
    UnknownAttributeError,
    UnknownClassError,
)
from docwarehouse.mergeclasses import (
    Ontology,
    _parse_ontology,
    load_ontology,
    merge_classes,
    merge_records,
    validate_ontology,
    values_equal,
    write_merge_report,
)


def fixture_ontology():
    return json.loads(fixtures.ontology_path().read_text())


def load_doc(doc, wh, tmp_path):
    path = tmp_path / "ont.json"
    path.write_text(json.dumps(doc))
    return load_ontology(path, wh)


def test_fixture_ontology_is_valid(ingested):
    wh, _, _ = ingested
    ont = load_ontology(fixtures.ontology_path(), wh)
    [group] = ont.groups
    assert group.canonical_name == "Insured_DW" and group.match_key == "NoInsured"
    assert [m.class_name for m in group.members] == ["Analysis_Patients", "ServiceProvision_Insured"]


def mutate(doc, path, value):
    target = doc
    for step in path[:-1]:
        target = target[step]
    target[path[-1]] = value
    return doc


@pytest.mark.parametrize(
    "path, value, error",
    [
        (("groups", 0, "canonicalName"), "Analysis_Patients", DuplicateClassError),
        (("groups", 0, "canonicalName"), "Bad Name", FormatError),
        (("groups", 0, "members", 1, "class"), "Nope", UnknownClassError),
        (("groups", 0, "members", 0, "attributeMap", "Missing"), "X", UnknownAttributeError),
        (("groups", 0, "matchKey"), "Gender", UnknownAttributeError),
        (("groups", 0, "members", 0, "attributeMap", "Email"), "NoInsured", FormatError),
        (("groups", 0, "members", 0, "attributeMap"), {"NoPat": "NoInsured", "Email": "FNamePat"}, FormatError),
        (("groups", 0, "members"), [{"class": "Analysis_Patients"}], FormatError),
        (("groups",), "x", FormatError),
    ],
)
def test_ontology_errors(ingested, tmp_path, path, value, error):
    wh, _, _ = ingested
    with pytest.raises(error):
        load_doc(mutate(fixture_ontology(), path, value), wh, tmp_path)


def test_overlapping_groups(ingested, tmp_path):
    wh, _, _ = ingested
    doc = fixture_ontology()
    second = copy.deepcopy(doc["groups"][0])
    second["canonicalName"] = "Other"
    doc["groups"].append(second)
    with pytest.raises(OverlappingGroupsError):
        load_doc(doc, wh, tmp_path)


def test_ontology_file_errors(ingested, tmp_path):
    wh, _, _ = ingested
    with pytest.raises(FormatError, match="not found"):
        load_ontology(tmp_path / "missing.json", wh)
    (tmp_path / "bad.json").write_text("{\n oops")
    with pytest.raises(FormatError, match="bad.json:2"):
        load_ontology(tmp_path / "bad.json", wh)


@pytest.mark.parametrize("a, b, equal", [
    (1, 1, True), (1, 1.0, False), (1, True, False), ("x", "x", True),
    (Rid(1, 0), Rid(1, 0), True), (Rid(1, 0), "#1:0", False),
    ([1, {"a": 2}], [1, {"a": 2}], True), ([1], [1.0], False), (None, None, True),
])
def test_values_equal(a, b, equal):
    assert values_equal(a, b) is equal


def test_merge_records_union_and_precedence():
    couples, conflicts = merge_records(
        [(0, {"NoInsured": "1", "Email": "a@x", "LNameIns": "Saadi"}),
         (1, {"NoInsured": "1", "Gender": "M", "LNameIns": "Sadi"})],
        sources=["P", "I"], entity="1",
    )
    assert list(couples) == ["NoInsured", "Email", "LNameIns", "Gender"]
    assert couples["LNameIns"] == "Saadi"
    [c] = conflicts
    assert (c.attribute, c.kept_source, c.kept, c.discarded) == ("LNameIns", "P", "Saadi", (("I", "Sadi"),))
    assert c.to_json()["discarded"] == [{"source": "I", "value": "Sadi"}]


def test_merge_records_identical_values_no_conflict():
    couples, conflicts = merge_records([(0, {"k": 1, "a": 2}), (1, {"k": 1, "a": 2})])
    assert couples == {"k": 1, "a": 2} and conflicts == []


small = st.one_of(st.integers(0, 3), st.sampled_from(["a", "b"]), st.booleans())
records = st.lists(st.dictionaries(st.sampled_from("kxyz"), small, max_size=4), min_size=1, max_size=5)


@given(records)
def test_merge_records_matches_replay(bucket):
    couples, conflicts = merge_records(list(enumerate(bucket)))
    # replay: for each attribute, the first record holding it decides the value
    order = []
    for rec in bucket:
        order += [a for a in rec if a not in order]
    assert list(couples) == order
    for attr in order:
        holders = [rec[attr] for rec in bucket if attr in rec]
        assert values_equal(couples[attr], holders[0])
        differs = any(not values_equal(v, holders[0]) for v in holders)
        assert differs == any(c.attribute == attr for c in conflicts)


def test_fixture_merge(merged):
    wh, report = merged
    dw = wh.get_class("Insured_DW")
    assert dw.cluster == 4
    # 3 insured + 3 patients, one shared key -> 5 entities
    assert [r["NoInsured"] for r in dw.records] == ["45657709", "87782784", "27724283", "13700008", "47504315"]
    assert report.merged == 5 and report.conflict_count == 0
    [group] = report.groups
    assert group.source_counts == {"Analysis_Patients": 3, "ServiceProvision_Insured": 3}
    assert sorted(dw.attributes) == sorted(["Email", "FNameIns", "LNameIns", "NoInsured", "Doctor", "Gender", "Spouse"])


def test_single_source_entity(merged):
    wh, _ = merged
    [hugo] = find_record(wh, "Insured_DW", ["NoInsured"], ["47504315"])
    [src] = find_record(wh, "ServiceProvision_Insured", ["NoInsured"], ["47504315"])
    assert hugo.couples == src.couples
    assert hugo.rid != src.rid


def test_members_untouched(ingested, tmp_path):
    wh, _, _ = ingested
    write_warehouse(wh, tmp_path / "before")
    merge_classes(wh, load_ontology(fixtures.ontology_path(), wh))
    write_warehouse(wh, tmp_path / "after")
    for cls in ("Analysis_Patients", "ServiceProvision_Insured", "Analysis_Physician"):
        name = f"classes/{cls}.jsonl"
        assert (tmp_path / "before" / name).read_bytes() == (tmp_path / "after" / name).read_bytes()


def test_zero_groups(ingested):
    wh, _, _ = ingested
    count = len(wh.classes)
    report = merge_classes(wh, Ontology())
    assert report.groups == [] and len(wh.classes) == count


def test_missing_match_key_strict(ingested, tmp_path):
    wh, _, _ = ingested
    doc = fixture_ontology()
    doc["groups"][0]["matchKey"] = "Email"
    doc["groups"][0]["members"][1]["attributeMap"] = {"FNameIns": "Email"}
    ont = load_doc(doc, wh, tmp_path)
    before = [c.name for c in wh.classes]
    with pytest.raises(MissingMatchKeyError) as exc:
        merge_classes(wh, ont)
    assert exc.value.rid == Rid(2, 2)
    assert [c.name for c in wh.classes] == before


def test_missing_match_key_lenient(ingested, tmp_path):
    wh, _, _ = ingested
    doc = fixture_ontology()
    doc["groups"][0]["matchKey"] = "Email"
    doc["groups"][0]["members"][1]["attributeMap"] = {"FNameIns": "Email"}
    report = merge_classes(wh, load_doc(doc, wh, tmp_path), strict=False)
    [group] = report.groups
    assert group.missing_key == [("Analysis_Patients", Rid(2, 2))]
    assert group.merged == 6


def test_merge_report_file(merged, tmp_path):
    _, report = merged
    doc = json.loads(write_merge_report(report, tmp_path).read_text())
    assert doc == {"groups": [{
        "canonicalName": "Insured_DW", "cluster": 4, "merged": 5,
        "sources": {"Analysis_Patients": 3, "ServiceProvision_Insured": 3},
        "conflicts": [], "missingMatchKey": [],
    }]}


@pytest.mark.parametrize("seed", range(5))
def test_merge_is_deterministic(seed, tmp_path):
    outs = []
    for run in ("a", "b"):
        left, right, doc, lenient = random_merge_instance(random.Random(seed))
        wh, cat = ingest_all([left, right], "W")
        convert_links(wh, cat)
        ont = _parse_ontology(doc, "random")
        validate_ontology(ont, wh)
        report = merge_classes(wh, ont, strict=not lenient)
        write_warehouse(wh, tmp_path / run)
        outs.append(((tmp_path / run / "classes" / "People.jsonl").read_bytes(), report.to_json()))
    assert outs[0] == outs[1]
