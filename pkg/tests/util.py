"""Shared helpers for building randomized yet reproducible orders."""

from __future__ import annotations

import random
from datetime import date, timedelta

from orbitflow.workorders import (
    IdSequence,
    Media,
    Outcome,
    OrderStatus,
    ProductSpec,
    ProductType,
    CorrectionLevel,
    RoutingRuleSet,
    StepStatus,
    WorkCenter,
    WorkOrder,
    advance,
    create_work_order,
    set_parameter,
)


def random_spec(rng: random.Random, rules: RoutingRuleSet) -> ProductSpec:
    satellite = rng.choice(sorted(rules.catalog))
    sensor = rng.choice(sorted(rules.catalog[satellite]))
    return ProductSpec(
        satellite=satellite,
        sensor=sensor,
        product_type=rng.choice(list(ProductType)),
        correction_level=rng.choice(list(CorrectionLevel)),
        media=rng.choice(list(Media)),
        path=rng.randint(0, 200),
        row=rng.randint(0, 200),
        acquisition_date=date(2026, 1, 1) + timedelta(days=rng.randint(-40, 40)),
    )


def random_walk(
    rng: random.Random,
    rules: RoutingRuleSet,
    ids: IdSequence,
    *,
    start_clock: float = 0.0,
    reject_probability: float = 0.25,
    cancel_probability: float = 0.02,
    param_probability: float = 0.3,
    max_events: int = 60,
) -> tuple[WorkOrder, float]:
    """Drive one order through a random legal transition sequence.

    Returns the final order (often terminal) and the clock afterwards.
    """
    clock = start_clock
    wo = create_work_order(random_spec(rng, rules), rules, clock, ids)
    for _ in range(max_events):
        if wo.status is not OrderStatus.OPEN:
            break
        clock += rng.uniform(1.0, 500.0)
        if rng.random() < param_probability:
            wo = set_parameter(wo, f"k{rng.randint(0, 9)}", f"v{rng.randint(0, 99)}", clock)
            continue
        if rng.random() < cancel_probability:
            wo, _ = advance(wo, Outcome.CANCEL, clock)
            continue
        step = wo.plan.current_step()
        if step.status is StepStatus.PENDING:
            wo, _ = advance(wo, Outcome.START, clock)
        elif step.center is WorkCenter.QC and rng.random() < reject_probability:
            earlier = [s.center for s in wo.plan.steps[: step.index]]
            wo, _ = advance(wo, Outcome.REJECT, clock, target=rng.choice(earlier))
        else:
            wo, _ = advance(wo, Outcome.COMPLETE, clock)
    return wo, clock


def create_order_chain(store, final: WorkOrder) -> None:
    """Persist an order's full history as the event-by-event appends the
    normal write path would have produced."""
    from orbitflow.workorders import initial_order, replay_apply

    wo = initial_order(final)
    store.save_new(wo)
    for event in final.history[1:]:
        wo = replay_apply(wo, event)
        store.append(wo.id, event)


def drive_to_completion(
    rng: random.Random,
    rules: RoutingRuleSet,
    ids: IdSequence,
    *,
    start_clock: float = 0.0,
    rejects: int = 0,
    reject_target: WorkCenter = WorkCenter.DP,
    params: dict[str, str] | None = None,
) -> tuple[WorkOrder, float]:
    """Run an order straight through, optionally rejecting at QC ``rejects``
    times before letting it pass."""
    clock = start_clock
    wo = create_work_order(random_spec(rng, rules), rules, clock, ids)
    for key, value in (params or {}).items():
        clock += 1.0
        wo = set_parameter(wo, key, value, clock)
    remaining_rejects = rejects
    while wo.status is OrderStatus.OPEN:
        clock += rng.uniform(10.0, 900.0)
        step = wo.plan.current_step()
        if step.status is StepStatus.PENDING:
            wo, _ = advance(wo, Outcome.START, clock)
        elif step.center is WorkCenter.QC and remaining_rejects > 0:
            remaining_rejects -= 1
            wo, _ = advance(wo, Outcome.REJECT, clock, target=reject_target)
        else:
            wo, _ = advance(wo, Outcome.COMPLETE, clock)
    return wo, clock
