# %% [markdown]
# # Loading relational sources
#
# A source database can arrive in two shapes: a snapshot directory
# (``schema.json`` plus one JSON Lines file per table) or a SQL dump.
# Both loaders produce the same in-memory ``RelationalDatabase``.

# %%
from docwarehouse import fixtures
from docwarehouse.relmodel import load_snapshot
from docwarehouse.sqldump import load_sql_dump

snapshot = load_snapshot(fixtures.snapshot_dir("Analysis"))
for table in snapshot.tables:
    print(table.name, table.primary_key, [c.name for c in table.columns])

# %% [markdown]
# Each row keeps its typed values; a missing doctor is a plain ``None``.

# %%
for row in snapshot.table("Patients").rows:
    print(row.values)

# %% [markdown]
# The SQL dump of the same database is written in a PostgreSQL flavour,
# while the other fixture dump uses MySQL conventions. Both parse to the
# very same structure.

# %%
dump = load_sql_dump(fixtures.sql_dump("Analysis"), "Analysis")
print("dump equals snapshot:", dump == snapshot)
print(fixtures.sql_dump("ServiceProvision").read_text()[:400])
