# %% [markdown]
# # Checking a source before ingestion
#
# ``validate_database`` looks for duplicate primary keys, foreign keys that
# point nowhere, and composite foreign keys that are only partly null.

# %%
from docwarehouse import fixtures
from docwarehouse.relmodel import Column, ForeignKey, RelationalDatabase, Row, Table, load_snapshot, validate_database

clean = load_snapshot(fixtures.snapshot_dir("ServiceProvision"))
print("fixture findings:", len(validate_database(clean)))

# %% [markdown]
# Now a deliberately broken clinic: patient ``b`` names doctor 5, who does
# not exist, and patient ``a`` appears twice.

# %%
patients = Table(
    "Patients",
    (Column("NoPat", "text", False), Column("Doctor", "integer", True)),
    ("NoPat",),
    (ForeignKey(("Doctor",), "Physician", ("NoPhys",)),),
    (Row({"NoPat": "a", "Doctor": 1}), Row({"NoPat": "b", "Doctor": 5}), Row({"NoPat": "a", "Doctor": None})),
)
physician = Table("Physician", (Column("NoPhys", "integer", False),), ("NoPhys",), (), (Row({"NoPhys": 1}),))
report = validate_database(RelationalDatabase("Clinic", (patients, physician)))
for line in report.lines():
    print(line)
