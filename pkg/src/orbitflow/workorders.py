"""Work-order domain: routing rules, routing plans, and the order state machine.

A work order tracks one data product through a chain of work centers.  Which
centers it visits is decided once, up front, by matching the product against an
ordered rule table (first match wins).  After that the order is a small state
machine: the current step is started, completed, or, at quality control,
rejected back to an earlier center for rework.

All operations here are pure: they validate, then return fresh objects and an
append-only history.  Callers own persistence, clocks, and id allocation, so
the module itself holds no shared mutable state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import date
from enum import Enum
from typing import Iterable, Optional


class WorkCenter(str, Enum):
    """Production stages, in chain order.  URP always opens a plan and
    DISPATCH always terminates it."""

    URP = "URP"
    DP = "DP"
    VAL = "VAL"
    FILM = "FILM"
    PHOTO = "PHOTO"
    QC = "QC"
    DISPATCH = "DISPATCH"


CHAIN_ORDER: tuple[WorkCenter, ...] = tuple(WorkCenter)


class ProductType(str, Enum):
    STANDARD = "STANDARD"
    PRECISION = "PRECISION"
    VALUE_ADDED = "VALUE_ADDED"


class CorrectionLevel(str, Enum):
    RAW = "RAW"
    RADIOMETRIC = "RADIOMETRIC"
    GEO = "GEO"
    ORTHO = "ORTHO"


class Media(str, Enum):
    DIGITAL = "DIGITAL"
    FILM = "FILM"
    PHOTO = "PHOTO"


class StepStatus(str, Enum):
    PENDING = "PENDING"
    IN_PROGRESS = "IN_PROGRESS"
    COMPLETED = "COMPLETED"
    # Transient marker used while a rejection resets steps; a settled plan
    # only ever persists the other three values.
    REWORK = "REWORK"


class OrderStatus(str, Enum):
    OPEN = "OPEN"
    COMPLETED = "COMPLETED"
    CANCELLED = "CANCELLED"


class EventKind(str, Enum):
    CREATED = "CREATED"
    STARTED = "STARTED"
    COMPLETED_STEP = "COMPLETED_STEP"
    REJECTED = "REJECTED"
    PARAM_SET = "PARAM_SET"
    CANCELLED = "CANCELLED"


class Outcome(str, Enum):
    """What the caller asks :func:`advance` to do with the current step."""

    START = "START"
    COMPLETE = "COMPLETE"
    REJECT = "REJECT"
    CANCEL = "CANCEL"


# ---------------------------------------------------------------------------
# Errors


class WorkOrderError(Exception):
    """Base class for work-order domain failures."""


class UnknownSensor(WorkOrderError):
    pass


class NoMatchingRule(WorkOrderError):
    pass


class InvalidRuleSet(WorkOrderError):
    pass


class IllegalTransition(WorkOrderError):
    pass


class NotAtQc(WorkOrderError):
    pass


class BadRejectTarget(WorkOrderError):
    pass


class OrderClosed(WorkOrderError):
    pass


# ---------------------------------------------------------------------------
# Domain types

_KEY_RE = re.compile(r"[A-Za-z0-9_.-]+\Z")
_PRINTABLE_RE = re.compile(r"[\x20-\x7e]*\Z")


@dataclass(frozen=True)
class ProductSpec:
    """What the customer ordered; immutable once the order exists."""

    satellite: str
    sensor: str
    product_type: ProductType
    correction_level: CorrectionLevel
    media: Media
    path: int
    row: int
    acquisition_date: date

    def validate(self) -> None:
        if not self.satellite or not self.sensor:
            raise ValueError("satellite and sensor must be non-empty")
        if self.path < 0 or self.row < 0:
            raise ValueError("path and row must be >= 0")

    def field_value(self, name: str) -> str:
        """String form of a field, as used in rule predicates."""
        value = getattr(self, name)
        if isinstance(value, Enum):
            return value.value
        if isinstance(value, date):
            return value.isoformat()
        return str(value)


PREDICATE_FIELDS = (
    "satellite",
    "sensor",
    "product_type",
    "correction_level",
    "media",
    "path",
    "row",
)


@dataclass(frozen=True)
class RoutingRule:
    """``predicate -> center list``.  An empty predicate is the default rule."""

    predicate: tuple[tuple[str, str], ...]
    centers: tuple[WorkCenter, ...]

    def matches(self, spec: ProductSpec) -> bool:
        return all(spec.field_value(f) == v for f, v in self.predicate)

    @property
    def is_default(self) -> bool:
        return not self.predicate


@dataclass(frozen=True)
class RoutingRuleSet:
    """Sensor catalog plus the ordered routing rule table."""

    catalog: dict[str, tuple[str, ...]]
    rules: tuple[RoutingRule, ...]
    version: int = 1

    def validate(self) -> None:
        if not any(r.is_default for r in self.rules):
            raise InvalidRuleSet("rule set has no default (*) rule")
        for rule in self.rules:
            centers = rule.centers
            if len(centers) < 3:
                raise InvalidRuleSet(f"rule too short: {centers}")
            if centers[0] is not WorkCenter.URP:
                raise InvalidRuleSet("every plan must start at URP")
            if centers[-1] is not WorkCenter.DISPATCH:
                raise InvalidRuleSet("every plan must end at DISPATCH")
            if centers.count(WorkCenter.QC) != 1:
                raise InvalidRuleSet("every plan must contain QC exactly once")
            if centers[-2] is not WorkCenter.QC:
                raise InvalidRuleSet("QC may precede only DISPATCH")
            if len(set(centers)) != len(centers):
                raise InvalidRuleSet(f"duplicate center in plan: {centers}")

    def check_catalog(self, spec: ProductSpec) -> None:
        sensors = self.catalog.get(spec.satellite)
        if sensors is None or spec.sensor not in sensors:
            raise UnknownSensor(
                f"sensor {spec.sensor!r} is not listed under satellite "
                f"{spec.satellite!r}"
            )


@dataclass
class Step:
    index: int
    center: WorkCenter
    status: StepStatus = StepStatus.PENDING
    entered_at: Optional[float] = None
    exited_at: Optional[float] = None

    def copy(self) -> "Step":
        return replace(self)


@dataclass
class RoutingPlan:
    steps: tuple[Step, ...]
    current_index: int = 0

    def current_step(self) -> Step:
        return self.steps[self.current_index]

    def center_index(self, center: WorkCenter) -> Optional[int]:
        for step in self.steps:
            if step.center is center:
                return step.index
        return None

    def copy(self) -> "RoutingPlan":
        return RoutingPlan(
            steps=tuple(s.copy() for s in self.steps),
            current_index=self.current_index,
        )

    @property
    def finished(self) -> bool:
        return self.current_index >= len(self.steps)


@dataclass(frozen=True)
class TransitionEvent:
    """One append-only history entry.  ``seq`` values are 1..n contiguous."""

    seq: int
    kind: EventKind
    center: WorkCenter
    at: float
    note: str = ""


@dataclass
class WorkOrder:
    id: str
    spec: ProductSpec
    plan: RoutingPlan
    parameters: dict[str, str]
    history: tuple[TransitionEvent, ...]
    status: OrderStatus
    created_at: float

    def current_center(self) -> Optional[WorkCenter]:
        if self.plan.finished:
            return None
        return self.plan.current_step().center

    def reject_count(self) -> int:
        return sum(1 for e in self.history if e.kind is EventKind.REJECTED)

    def completed_at(self) -> Optional[float]:
        if self.status is not OrderStatus.COMPLETED:
            return None
        return self.history[-1].at

    def last_update_at(self) -> float:
        return self.history[-1].at

    def copy(self) -> "WorkOrder":
        return WorkOrder(
            id=self.id,
            spec=self.spec,
            plan=self.plan.copy(),
            parameters=dict(self.parameters),
            history=self.history,
            status=self.status,
            created_at=self.created_at,
        )


@dataclass
class IdSequence:
    """Caller-owned allocator for ``WO-``-prefixed order ids.

    Kept outside the pure operations so that they stay stateless; whoever
    persists orders owns the counter.
    """

    next_value: int = 1

    def allocate(self) -> str:
        wo_id = f"WO-{self.next_value:06d}"
        self.next_value += 1
        return wo_id


# ---------------------------------------------------------------------------
# Domain events (for publication on the bus)


@dataclass(frozen=True)
class DomainEvent:
    """A transition description suitable for publishing as a bus message."""

    kind: str
    work_order_id: str
    at: float
    center: Optional[WorkCenter] = None

    @property
    def topic(self) -> str:
        c = self.center.value.lower() if self.center else ""
        return {
            "created": "workorder.created",
            "assigned": f"workorder.assigned.{c}",
            "started": f"workorder.started.{c}",
            "step_completed": f"workorder.completed.{c}",
            "rejected": "workorder.rejected",
            "order_completed": "workorder.completed",
            "cancelled": "workorder.cancelled",
        }[self.kind]


def creation_events(wo: WorkOrder) -> list[DomainEvent]:
    """Events announcing a freshly created order: created + first assignment."""
    first = wo.plan.steps[0].center
    return [
        DomainEvent("created", wo.id, wo.created_at),
        DomainEvent("assigned", wo.id, wo.created_at, first),
    ]


# ---------------------------------------------------------------------------
# Operations


def plan_route(spec: ProductSpec, rules: RoutingRuleSet) -> RoutingPlan:
    """Pick the first matching rule and lay out a fresh all-PENDING plan."""
    spec.validate()
    rules.check_catalog(spec)
    for rule in rules.rules:
        if rule.matches(spec):
            centers = rule.centers
            break
    else:
        raise NoMatchingRule(
            "no rule matched and no default rule present; rule set is corrupt"
        )
    if spec.product_type is ProductType.VALUE_ADDED and WorkCenter.VAL not in centers:
        raise InvalidRuleSet(
            "matched plan lacks VAL for a value-added product; rule set is corrupt"
        )
    steps = tuple(Step(index=i, center=c) for i, c in enumerate(centers))
    return RoutingPlan(steps=steps, current_index=0)


def create_work_order(
    spec: ProductSpec,
    rules: RoutingRuleSet,
    clock: float,
    ids: IdSequence,
) -> WorkOrder:
    """Open a new order.  No id is consumed if routing fails."""
    plan = plan_route(spec, rules)
    wo_id = ids.allocate()
    created = TransitionEvent(
        seq=1, kind=EventKind.CREATED, center=plan.steps[0].center, at=clock
    )
    return WorkOrder(
        id=wo_id,
        spec=spec,
        plan=plan,
        parameters={},
        history=(created,),
        status=OrderStatus.OPEN,
        created_at=clock,
    )


def _append(wo: WorkOrder, event: TransitionEvent, **changes) -> WorkOrder:
    return WorkOrder(
        id=wo.id,
        spec=wo.spec,
        plan=changes.get("plan", wo.plan),
        parameters=changes.get("parameters", wo.parameters),
        history=wo.history + (event,),
        status=changes.get("status", wo.status),
        created_at=wo.created_at,
    )


def advance(
    wo: WorkOrder,
    outcome: Outcome,
    clock: float,
    target: Optional[WorkCenter] = None,
) -> tuple[WorkOrder, list[DomainEvent]]:
    """Drive the state machine one transition and describe it for the bus.

    START is legal only on a PENDING current step, COMPLETE only on an
    IN_PROGRESS one.  REJECT is legal only while QC is in progress and sends
    the order back to ``target``, an earlier plan step; every step from the
    target through QC is reset to PENDING for rework.  CANCEL closes an open
    order wherever it stands.  The input order is never mutated.
    """
    if wo.status is not OrderStatus.OPEN:
        raise IllegalTransition(f"order {wo.id} is {wo.status.value}, not OPEN")

    plan = wo.plan.copy()
    step = plan.current_step()
    seq = len(wo.history) + 1

    if outcome is Outcome.START:
        if step.status is not StepStatus.PENDING:
            raise IllegalTransition(
                f"START requires a PENDING step; {step.center.value} is "
                f"{step.status.value}"
            )
        step.status = StepStatus.IN_PROGRESS
        step.entered_at = clock
        event = TransitionEvent(seq, EventKind.STARTED, step.center, clock)
        return (
            _append(wo, event, plan=plan),
            [DomainEvent("started", wo.id, clock, step.center)],
        )

    if outcome is Outcome.COMPLETE:
        if step.status is not StepStatus.IN_PROGRESS:
            raise IllegalTransition(
                f"COMPLETE requires an IN_PROGRESS step; {step.center.value} is "
                f"{step.status.value}"
            )
        step.status = StepStatus.COMPLETED
        step.exited_at = clock
        plan.current_index += 1
        event = TransitionEvent(seq, EventKind.COMPLETED_STEP, step.center, clock)
        events = [DomainEvent("step_completed", wo.id, clock, step.center)]
        if plan.finished:
            events.append(DomainEvent("order_completed", wo.id, clock))
            return (_append(wo, event, plan=plan, status=OrderStatus.COMPLETED), events)
        nxt = plan.current_step().center
        events.append(DomainEvent("assigned", wo.id, clock, nxt))
        return (_append(wo, event, plan=plan), events)

    if outcome is Outcome.REJECT:
        if step.center is not WorkCenter.QC:
            raise NotAtQc(f"REJECT is only legal at QC, not {step.center.value}")
        if step.status is not StepStatus.IN_PROGRESS:
            raise IllegalTransition("REJECT requires QC to be IN_PROGRESS")
        if target is None:
            raise BadRejectTarget("REJECT requires a target center")
        target_index = plan.center_index(target)
        if target_index is None or target_index >= step.index:
            raise BadRejectTarget(
                f"{target.value} is not an earlier step of this plan"
            )
        # Rework: everything from the target through QC runs again.
        for s in plan.steps[target_index : step.index + 1]:
            s.status = StepStatus.PENDING
            s.entered_at = None
            s.exited_at = None
        plan.current_index = target_index
        event = TransitionEvent(
            seq, EventKind.REJECTED, WorkCenter.QC, clock, note=f"target={target.value}"
        )
        return (
            _append(wo, event, plan=plan),
            [
                DomainEvent("rejected", wo.id, clock, WorkCenter.QC),
                DomainEvent("assigned", wo.id, clock, target),
            ],
        )

    if outcome is Outcome.CANCEL:
        event = TransitionEvent(seq, EventKind.CANCELLED, step.center, clock)
        return (
            _append(wo, event, plan=plan, status=OrderStatus.CANCELLED),
            [DomainEvent("cancelled", wo.id, clock, step.center)],
        )

    raise IllegalTransition(f"unknown outcome {outcome!r}")


def set_parameter(wo: WorkOrder, key: str, value: str, clock: float) -> WorkOrder:
    """Insert or overwrite one entry of the order's dynamic contents."""
    if wo.status is not OrderStatus.OPEN:
        raise OrderClosed(f"order {wo.id} is {wo.status.value}")
    if not _KEY_RE.match(key):
        raise ValueError(f"parameter key {key!r} must match [A-Za-z0-9_.-]+")
    if not _PRINTABLE_RE.match(value):
        raise ValueError("parameter values must be printable ASCII")
    params = dict(wo.parameters)
    params[key] = value
    center = wo.plan.current_step().center
    event = TransitionEvent(
        seq=len(wo.history) + 1,
        kind=EventKind.PARAM_SET,
        center=center,
        at=clock,
        note=f"{key}={value}",
    )
    return _append(wo, event, parameters=params)


# ---------------------------------------------------------------------------
# History replay
#
# The replay is an independent re-derivation of order state from the recorded
# events; it deliberately does not share the transition code above so that the
# two can be checked against each other.


def replay_apply(wo: WorkOrder, event: TransitionEvent) -> WorkOrder:
    """Fold one recorded event into a reconstructed order."""
    plan = wo.plan.copy()
    params = dict(wo.parameters)
    status = wo.status

    if event.kind is EventKind.STARTED:
        s = plan.steps[plan.current_index]
        s.status = StepStatus.IN_PROGRESS
        s.entered_at = event.at
    elif event.kind is EventKind.COMPLETED_STEP:
        s = plan.steps[plan.current_index]
        s.status = StepStatus.COMPLETED
        s.exited_at = event.at
        plan.current_index += 1
        if plan.current_index >= len(plan.steps):
            status = OrderStatus.COMPLETED
    elif event.kind is EventKind.REJECTED:
        target = WorkCenter(event.note.split("=", 1)[1])
        target_index = plan.center_index(target)
        for i in range(target_index, plan.current_index + 1):
            s = plan.steps[i]
            s.status = StepStatus.PENDING
            s.entered_at = None
            s.exited_at = None
        plan.current_index = target_index
    elif event.kind is EventKind.PARAM_SET:
        key, _, value = event.note.partition("=")
        params[key] = value
    elif event.kind is EventKind.CANCELLED:
        status = OrderStatus.CANCELLED
    elif event.kind is EventKind.CREATED:
        raise ValueError("CREATED may only appear as the first event")
    return WorkOrder(
        id=wo.id,
        spec=wo.spec,
        plan=plan,
        parameters=params,
        history=wo.history + (event,),
        status=status,
        created_at=wo.created_at,
    )


def initial_order(wo: WorkOrder) -> WorkOrder:
    """The order as it stood right after creation (history = CREATED only)."""
    plan = RoutingPlan(
        steps=tuple(Step(index=s.index, center=s.center) for s in wo.plan.steps),
        current_index=0,
    )
    return WorkOrder(
        id=wo.id,
        spec=wo.spec,
        plan=plan,
        parameters={},
        history=wo.history[:1],
        status=OrderStatus.OPEN,
        created_at=wo.created_at,
    )


def replay(initial: WorkOrder, events: Iterable[TransitionEvent]) -> WorkOrder:
    """Reconstruct an order by folding events over its creation state."""
    wo = initial.copy()
    for event in events:
        wo = replay_apply(wo, event)
    return wo


def replay_from_history(wo: WorkOrder) -> WorkOrder:
    """Rebuild ``wo`` purely from its own history (the replay oracle)."""
    return replay(initial_order(wo), wo.history[1:])


# ---------------------------------------------------------------------------
# Rule-set configuration format
#
#   version 1
#   [catalog]
#   IRS-P6: AWIFS,LISS-3,LISS-4
#   [rules]
#   product_type=VALUE_ADDED,media=FILM : URP,DP,VAL,FILM,QC,DISPATCH
#   * : URP,DP,QC,DISPATCH
#
# '#' starts a comment; first matching rule wins.


def parse_rule_set(text: str) -> RoutingRuleSet:
    catalog: dict[str, tuple[str, ...]] = {}
    rules: list[RoutingRule] = []
    version = 1
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("catalog", "rules"):
                raise InvalidRuleSet(f"line {lineno}: unknown section [{section}]")
            continue
        if section is None:
            if line.startswith("version"):
                version = int(line.split()[1])
                continue
            raise InvalidRuleSet(f"line {lineno}: content before any section")
        if section == "catalog":
            sat, _, sensors = line.partition(":")
            sat = sat.strip()
            names = tuple(s.strip() for s in sensors.split(",") if s.strip())
            if not sat or not names:
                raise InvalidRuleSet(f"line {lineno}: bad catalog entry")
            catalog[sat] = names
        else:
            pred_text, _, centers_text = line.partition(":")
            pred_text = pred_text.strip()
            centers = []
            for token in centers_text.split(","):
                token = token.strip()
                try:
                    centers.append(WorkCenter(token))
                except ValueError:
                    raise InvalidRuleSet(
                        f"line {lineno}: unknown work center {token!r}"
                    ) from None
            if pred_text == "*":
                predicate: tuple[tuple[str, str], ...] = ()
            else:
                pairs = []
                for clause in pred_text.split(","):
                    name, eq, value = clause.partition("=")
                    name, value = name.strip(), value.strip()
                    if not eq or name not in PREDICATE_FIELDS:
                        raise InvalidRuleSet(
                            f"line {lineno}: bad predicate clause {clause!r}"
                        )
                    pairs.append((name, value))
                predicate = tuple(pairs)
            rules.append(RoutingRule(predicate=predicate, centers=tuple(centers)))
    rule_set = RoutingRuleSet(catalog=catalog, rules=tuple(rules), version=version)
    rule_set.validate()
    return rule_set


def load_rule_set(path) -> RoutingRuleSet:
    from pathlib import Path

    return parse_rule_set(Path(path).read_text(encoding="ascii"))


def default_rule_set() -> RoutingRuleSet:
    """The rule table shipped with the package."""
    from importlib import resources

    text = resources.files("orbitflow").joinpath("data/default.rules").read_text()
    return parse_rule_set(text)
