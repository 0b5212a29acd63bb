# %% [markdown]
# # Merging equivalent classes
#
# Patients of the analysis database and insured people of the service
# database describe the same persons. An ontology file says so, maps the
# attribute names onto one vocabulary, and picks ``NoInsured`` as the key
# that identifies a person.

# %%
import json

from docwarehouse import fixtures
from docwarehouse.convertlinks import convert_links
from docwarehouse.createdw import ingest_all
from docwarehouse.docmodel import dumps_pretty
from docwarehouse.mergeclasses import load_ontology, merge_classes, merge_records
from docwarehouse.relmodel import load_snapshot

print(fixtures.ontology_path().read_text())

dbs = [load_snapshot(fixtures.snapshot_dir(n)) for n in fixtures.DATABASES]
wh, catalog = ingest_all(dbs, "DW")
convert_links(wh, catalog)
report = merge_classes(wh, load_ontology(fixtures.ontology_path(), wh))

# %% [markdown]
# Ramon Saadi is both a patient and an insured person. His merged record
# unions both sources and keeps their references exactly as they were.

# %%
ramon = wh.get_class("Insured_DW").records[0]
print(dumps_pretty(ramon.to_json(header=True)))
print(json.dumps(report.to_json(), indent=2))

# %% [markdown]
# When two sources disagree, the member listed first wins and the loser is
# reported.

# %%
couples, conflicts = merge_records(
    [(0, {"NoInsured": "1", "LNameIns": "Saadi"}), (1, {"NoInsured": "1", "LNameIns": "Sadi"})],
    sources=["Analysis_Patients", "ServiceProvision_Insured"],
    entity="1",
)
print(couples)
print([c.to_json() for c in conflicts])
