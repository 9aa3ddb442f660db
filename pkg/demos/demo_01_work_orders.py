"""Walk one product order through the work-center chain.

Shows routing (rule table -> plan), the step state machine, a QC rejection
with rework, and the dynamic parameter bag.
"""

from datetime import date

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
    plan_route,
    set_parameter,
)

rules = default_rule_set()

# A value-added film product: the rule table inserts VAL and FILM.
spec = ProductSpec(
    satellite="IRS-P6",
    sensor="LISS-4",
    product_type=ProductType.VALUE_ADDED,
    correction_level=CorrectionLevel.ORTHO,
    media=Media.FILM,
    path=98,
    row=62,
    acquisition_date=date(2026, 1, 3),
)
plan = plan_route(spec, rules)
print("route:", " -> ".join(s.center.value for s in plan.steps))

ids = IdSequence()
wo = create_work_order(spec, rules, clock=0.0, ids=ids)
print("created", wo.id, "status", wo.status.value)

# Operators and schedulers attach whatever the next center needs.
wo = set_parameter(wo, "scene_shift", "+1", clock=5.0)
wo = set_parameter(wo, "customer", "C007", clock=6.0)

# Run the chain; reject once at QC to show the rework loop.
clock = 10.0
rejected_once = False
while wo.status.value == "OPEN":
    step = wo.plan.current_step()
    if step.status.value == "PENDING":
        wo, events = advance(wo, Outcome.START, clock)
    elif step.center is WorkCenter.QC and not rejected_once:
        rejected_once = True
        wo, events = advance(wo, Outcome.REJECT, clock, target=WorkCenter.VAL)
        print(f"t={clock:7.0f}  QC rejected back to VAL "
              f"(cursor -> step {wo.plan.current_index})")
        clock += 60.0
        continue
    else:
        wo, events = advance(wo, Outcome.COMPLETE, clock)
    for event in events:
        print(f"t={clock:7.0f}  {event.topic}")
    clock += 60.0

print("final status:", wo.status.value)
print("history length:", len(wo.history), "events; rejects:", wo.reject_count())
print("parameters:", dict(wo.parameters))
