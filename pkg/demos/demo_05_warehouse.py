"""The analytical side: ETL past the wrinkle gate, cubes, rollup, snowflake.

Completed orders become fact rows once their data stops changing (24h wrinkle
by default); precomputed aggregates answer grouped queries; the star layout
normalizes into a snowflake without changing any answer.
"""

import random
import tempfile
from datetime import date, timedelta
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
    set_parameter,
)
from orbitflow.store import OperationalStore
from orbitflow.warehouse import (
    COUNT,
    ProductSalesWarehouse,
    WarehouseQuery,
    format_money,
    normalize_to_snowflake,
    sum_of,
)
from orbitflow.workorders import default_rule_set

rules = default_rule_set()
rng = random.Random(2026)


def finished_order(store, ids, clock):
    """Create one order, attach sales data, and run it to completion."""
    satellite = rng.choice(sorted(rules.catalog))
    spec = ProductSpec(
        satellite, rng.choice(sorted(rules.catalog[satellite])),
        rng.choice(list(ProductType)), rng.choice(list(CorrectionLevel)),
        rng.choice(list(Media)), rng.randint(1, 200), rng.randint(1, 200),
        date(2026, 1, 1) + timedelta(days=rng.randint(0, 10)),
    )
    wo = create_work_order(spec, rules, clock, ids)
    store.save_new(wo)
    for key, value in (
        ("customer", f"C{rng.randint(1, 6):03d}"),
        ("region", rng.choice(["NORTH", "SOUTH", "EAST", "WEST"])),
        ("amount", f"{rng.randint(100, 900)}.{rng.randint(0, 99):02d}"),
        ("quantity", str(rng.randint(1, 4))),
    ):
        wo = set_parameter(wo, key, value, clock)
        store.record(wo)
    rejects = rng.randint(0, 1)
    while wo.status.value == "OPEN":
        clock += rng.uniform(60.0, 900.0)
        step = wo.plan.current_step()
        if step.status.value == "PENDING":
            wo, _ = advance(wo, Outcome.START, clock)
        elif step.center is WorkCenter.QC and rejects > 0:
            rejects -= 1
            wo, _ = advance(wo, Outcome.REJECT, clock, target=WorkCenter.DP)
        else:
            wo, _ = advance(wo, Outcome.COMPLETE, clock)
        store.record(wo)
    return wo, clock


with tempfile.TemporaryDirectory() as tmp:
    store = OperationalStore(Path(tmp) / "ops", fsync=False)
    ids = IdSequence()
    newest = 0.0
    clock = 0.0
    for i in range(30):
        wo, clock = finished_order(store, ids, clock)
        newest = max(newest, wo.last_update_at())

    wh = ProductSalesWarehouse()
    gated = wh.etl_run(store, now=newest + 3600.0)
    print(f"one hour after the last update: {gated.facts_added} loaded, "
          f"{gated.rows_skipped} still inside the wrinkle window")
    loaded = wh.etl_run(store, now=newest + 90_000.0)
    print(f"a day later: {loaded.facts_added} loaded; rerun adds "
          f"{wh.etl_run(store, now=newest + 90_001.0).facts_added}")

    wh.build_aggregates([("satellite", "sensor"), ("region", "product_type")])

    q = WarehouseQuery(group_by=("satellite",), measure=sum_of("amount"))
    print("\nsales by satellite (precomputed cube):")
    for key, cents in wh.query(q):
        print(f"  {key[0]:<11} {format_money(cents)}")

    drilled = wh.drilldown(q, "sensor")
    print("drill down to sensors of IRS-P6:")
    for key, cents in wh.query(
        WarehouseQuery(drilled.group_by, drilled.measure,
                       filters=(("satellite", "IRS-P6"),))
    ):
        print(f"  {key[0]:<11} {key[1]:<9} {format_money(cents)}")

    rolled = wh.rollup(WarehouseQuery(("sensor",), COUNT))
    print("rollup of [sensor] regroups by:", rolled.group_by)

    sf = normalize_to_snowflake(wh)
    print("\nsnowflake tables:", ", ".join(sorted(sf.tables)))
    check = WarehouseQuery(("region",), sum_of("quantity"))
    print("same answers after normalization:",
          sf.query(check) == wh.query(check))

    print("\nturn-around time by center (rework visits included):")
    _, rows = wh.report_tat("CENTER")
    for center, visits, mean_seconds in rows:
        print(f"  {center:<9} visits={visits:<4} mean={mean_seconds:9.1f}s")

    out = Path(tmp) / "warehouse"
    wh.save(out)
    print("\npersisted tables:", ", ".join(sorted(p.name for p in out.iterdir())))
    store.close()
