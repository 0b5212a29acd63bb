from __future__ import annotations

import pytest

from docwarehouse import fixtures
from docwarehouse.convertlinks import convert_links
from docwarehouse.createdw import ingest_all
from docwarehouse.mergeclasses import load_ontology, merge_classes
from docwarehouse.relmodel import load_snapshot

_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.stash[_ACCEPTANCE] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    results = item.config.stash[_ACCEPTANCE]
    first_title, ok = results.get(number, (title, True))
    results[number] = (first_title, ok and report.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_ACCEPTANCE]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def fixture_dbs():
    return [load_snapshot(fixtures.snapshot_dir(name)) for name in fixtures.DATABASES]


@pytest.fixture
def ingested(fixture_dbs):
    """Fixture warehouse after ingestion and link conversion."""
    wh, cat = ingest_all(fixture_dbs, "DW")
    report = convert_links(wh, cat)
    return wh, cat, report


@pytest.fixture
def merged(ingested):
    wh, cat, _ = ingested
    ont = load_ontology(fixtures.ontology_path(), wh)
    report = merge_classes(wh, ont)
    return wh, report
