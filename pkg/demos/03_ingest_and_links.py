# %% [markdown]
# # From tables to classes, from keys to references
#
# Every table becomes a class named ``<database>_<table>``; every row becomes
# a record with its own rid ``#cluster:position``. A key catalog remembers
# which rid each primary key landed on.

# %%
from docwarehouse import fixtures
from docwarehouse.convertlinks import check_referential_integrity, convert_links
from docwarehouse.createdw import ingest_all
from docwarehouse.relmodel import load_snapshot

dbs = [load_snapshot(fixtures.snapshot_dir(n)) for n in fixtures.DATABASES]
wh, catalog = ingest_all(dbs, "DW")
for cls in wh.classes:
    print(cls.cluster, cls.name, len(cls.records))

patient = wh.get_class("Analysis_Patients").records[0]
print("before:", patient.to_json())

# %% [markdown]
# Link conversion swaps each foreign-key value for the rid of the record it
# names. Null links simply have no couple at all.

# %%
report = convert_links(wh, catalog)
print("after: ", patient.to_json())
print(report.to_json())
print("broken references:", len(check_referential_integrity(wh)))

# %% [markdown]
# Running the conversion again changes nothing.

# %%
print("second run converted:", convert_links(wh, catalog).converted)
