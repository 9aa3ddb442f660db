"""The operational journal: appends, recovery, queries, and compaction.

Every transition lands as one XML line; a restarted store refolds order state
from the journal, and compaction snapshots closed orders without changing a
single observable answer.
"""

import tempfile
from datetime import date
from pathlib import Path

from orbitflow import (
    CorrectionLevel,
    IdSequence,
    Media,
    Outcome,
    ProductSpec,
    ProductType,
    WorkCenter,
    advance,
    create_work_order,
    default_rule_set,
)
from orbitflow.store import OperationalStore

rules = default_rule_set()
ids = IdSequence()
spec = ProductSpec("IRS-1A", "LISS-1", ProductType.STANDARD,
                   CorrectionLevel.RADIOMETRIC, Media.DIGITAL,
                   12, 40, date(2026, 1, 1))

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp) / "ops"
    store = OperationalStore(root)

    wo = create_work_order(spec, rules, clock=0.0, ids=ids)
    store.save_new(wo)
    clock = 10.0
    while wo.status.value == "OPEN":
        outcome = (Outcome.START
                   if wo.plan.current_step().status.value == "PENDING"
                   else Outcome.COMPLETE)
        wo, _ = advance(wo, outcome, clock)
        store.record(wo)
        clock += 50.0

    second = create_work_order(spec, rules, clock=clock, ids=ids)
    store.save_new(second)

    print("journal lines:")
    for line in (root / "journal.log").read_text().splitlines()[:3]:
        print("  ", line[:110], "...")

    print("\nopen orders:", store.list_open())
    print("open at URP:", store.list_open(WorkCenter.URP))
    print("completed in [0, 1e6]:", store.completed_between(0.0, 1e6))

    store.close()
    revived = OperationalStore(root)
    print("\nafter restart, state refolds:", revived.load(wo.id) == wo)

    snapshot = revived.compact(clock=clock)
    print("compacted closed orders into", snapshot.name)
    print("answers unchanged:",
          revived.load(wo.id) == wo and revived.list_open() == [second.id])
    revived.close()
