"""Lossless XML mapping for work orders.

``to_xml`` renders a work order in the documented interchange format (root
``work-order`` with ``product``, ``routing``, ``parameters`` and ``history``
sections); ``from_xml`` validates the document against the shipped schema,
applies the semantic checks the grammar cannot express, and reconstructs an
identical order.  The pair round-trips exactly, parameter order and history
included, so XML payloads can stand in for in-memory orders anywhere.
"""

from __future__ import annotations

from datetime import date
from functools import lru_cache
from importlib import resources

from . import workorders as wo_mod
from .timebase import fmt_ts, parse_ts
from .workorders import (
    CorrectionLevel,
    EventKind,
    Media,
    OrderStatus,
    ProductSpec,
    ProductType,
    RoutingPlan,
    Step,
    StepStatus,
    TransitionEvent,
    WorkCenter,
    WorkOrder,
)
from .xmlcore import XmlNode, parse, serialize
from .xmlschema import SchemaDecl, Violation, parse_schema, validate


class SchemaViolation(Exception):
    """The document does not satisfy the work-order schema."""

    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


class SemanticError(Exception):
    """Schema-valid document with contradictory contents."""


@lru_cache(maxsize=1)
def workorder_schema() -> SchemaDecl:
    text = resources.files("orbitflow").joinpath("data/workorder.schema").read_text()
    return parse_schema(text)


def to_xml(wo: WorkOrder) -> XmlNode:
    product = XmlNode(
        "product",
        attributes={
            "satellite": wo.spec.satellite,
            "sensor": wo.spec.sensor,
            "product-type": wo.spec.product_type.value,
            "correction-level": wo.spec.correction_level.value,
            "media": wo.spec.media.value,
            "path": str(wo.spec.path),
            "row": str(wo.spec.row),
            "acquisition-date": wo.spec.acquisition_date.isoformat(),
        },
    )
    routing = XmlNode("routing", attributes={"current": str(wo.plan.current_index)})
    for step in wo.plan.steps:
        attrs = {
            "index": str(step.index),
            "center": step.center.value,
            "status": step.status.value,
        }
        if step.entered_at is not None:
            attrs["entered"] = fmt_ts(step.entered_at)
        if step.exited_at is not None:
            attrs["exited"] = fmt_ts(step.exited_at)
        routing.children.append(XmlNode("step", attributes=attrs))
    parameters = XmlNode("parameters")
    for key, value in wo.parameters.items():
        parameters.children.append(
            XmlNode("param", attributes={"key": key, "value": value})
        )
    history = XmlNode("history")
    for event in wo.history:
        attrs = {
            "seq": str(event.seq),
            "type": event.kind.value,
            "center": event.center.value,
            "at": fmt_ts(event.at),
        }
        if event.note != "":
            attrs["note"] = event.note
        history.children.append(XmlNode("event", attributes=attrs))
    return XmlNode(
        "work-order",
        attributes={
            "id": wo.id,
            "created": fmt_ts(wo.created_at),
            "status": wo.status.value,
        },
        children=[product, routing, parameters, history],
    )


def to_xml_text(wo: WorkOrder) -> str:
    return serialize(to_xml(wo))


def to_xml_bytes(wo: WorkOrder) -> bytes:
    return to_xml_text(wo).encode("ascii")


def _int_attr(node: XmlNode, attr: str, *, minimum: int = 0) -> int:
    raw = node.attributes[attr]
    try:
        value = int(raw)
    except ValueError:
        raise SemanticError(f"{node.name}@{attr}: {raw!r} is not an integer") from None
    if value < minimum:
        raise SemanticError(f"{node.name}@{attr}: {value} < {minimum}")
    return value


def _ts_attr(node: XmlNode, attr: str) -> float:
    raw = node.attributes[attr]
    try:
        return parse_ts(raw)
    except ValueError:
        raise SemanticError(f"{node.name}@{attr}: {raw!r} is not a timestamp") from None


def from_xml(doc: XmlNode | str | bytes) -> WorkOrder:
    """Rebuild a work order from its interchange document.

    Raises :class:`SchemaViolation` when the shipped grammar rejects the
    document, :class:`SemanticError` when the contents are schema-valid but
    inconsistent (index gaps, an out-of-range cursor, broken status algebra).
    """
    if isinstance(doc, (str, bytes)):
        doc = parse(doc)
    violations = validate(doc, workorder_schema())
    if violations:
        raise SchemaViolation(violations)

    status = OrderStatus(doc.attributes["status"])
    created_at = _ts_attr(doc, "created")
    product = doc.find("product")
    try:
        acquisition = date.fromisoformat(product.attributes["acquisition-date"])
    except ValueError:
        raise SemanticError("product@acquisition-date is not a calendar date") from None
    spec = ProductSpec(
        satellite=product.attributes["satellite"],
        sensor=product.attributes["sensor"],
        product_type=ProductType(product.attributes["product-type"]),
        correction_level=CorrectionLevel(product.attributes["correction-level"]),
        media=Media(product.attributes["media"]),
        path=_int_attr(product, "path"),
        row=_int_attr(product, "row"),
        acquisition_date=acquisition,
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise SemanticError(str(exc)) from None

    routing = doc.find("routing")
    steps = []
    for i, step_node in enumerate(routing.find_all("step")):
        if _int_attr(step_node, "index") != i:
            raise SemanticError(f"step indexes must run 0..n-1; step {i} disagrees")
        step_status = StepStatus(step_node.attributes["status"])
        if step_status is StepStatus.REWORK:
            raise SemanticError("REWORK is transient and never stored")
        entered = exited = None
        if "entered" in step_node.attributes:
            entered = _ts_attr(step_node, "entered")
        if "exited" in step_node.attributes:
            exited = _ts_attr(step_node, "exited")
        if entered is not None and exited is not None and entered > exited:
            raise SemanticError(f"step {i}: entered after exited")
        steps.append(
            Step(
                index=i,
                center=WorkCenter(step_node.attributes["center"]),
                status=step_status,
                entered_at=entered,
                exited_at=exited,
            )
        )
    if not steps:
        raise SemanticError("routing has no steps")
    current = _int_attr(routing, "current")
    plan = RoutingPlan(steps=tuple(steps), current_index=current)
    _check_plan_coherence(status, plan)

    parameters: dict[str, str] = {}
    param_nodes = doc.find("parameters").find_all("param")
    for node in param_nodes:
        parameters[node.attributes["key"]] = node.attributes["value"]
    if len(parameters) != len(param_nodes):
        raise SemanticError("duplicate parameter key")

    events = []
    for i, node in enumerate(doc.find("history").find_all("event"), start=1):
        if _int_attr(node, "seq", minimum=1) != i:
            raise SemanticError(f"history seq values must run 1..n; event {i} disagrees")
        kind = EventKind(node.attributes["type"])
        if (kind is EventKind.CREATED) != (i == 1):
            raise SemanticError("CREATED must be exactly the first history event")
        events.append(
            TransitionEvent(
                seq=i,
                kind=kind,
                center=WorkCenter(node.attributes["center"]),
                at=_ts_attr(node, "at"),
                note=node.attributes.get("note", ""),
            )
        )
    if not events:
        raise SemanticError("history is empty")
    if events[0].at != created_at:
        raise SemanticError("creation event disagrees with work-order@created")

    return WorkOrder(
        id=doc.attributes["id"],
        spec=spec,
        plan=plan,
        parameters=parameters,
        history=tuple(events),
        status=status,
        created_at=created_at,
    )


def _check_plan_coherence(status: OrderStatus, plan: RoutingPlan) -> None:
    n = len(plan.steps)
    current = plan.current_index
    if status is OrderStatus.COMPLETED:
        if current != n:
            raise SemanticError(f"completed order must have current={n}, got {current}")
        if any(s.status is not StepStatus.COMPLETED for s in plan.steps):
            raise SemanticError("completed order with unfinished steps")
        return
    if current >= n:
        raise SemanticError(f"current={current} out of range for {n}-step plan")
    for step in plan.steps:
        if step.index < current and step.status is not StepStatus.COMPLETED:
            raise SemanticError(f"step {step.index} precedes the cursor but is "
                                f"{step.status.value}")
        if step.index == current and step.status not in (
            StepStatus.PENDING,
            StepStatus.IN_PROGRESS,
        ):
            raise SemanticError(f"current step is {step.status.value}")
        if step.index > current and step.status is not StepStatus.PENDING:
            raise SemanticError(f"step {step.index} follows the cursor but is "
                                f"{step.status.value}")


def replay_check(wo: WorkOrder) -> bool:
    """True when the order's history refolds to its stored state exactly,
    parameter insertion order included."""
    replayed = wo_mod.replay_from_history(wo)
    return replayed == wo and list(replayed.parameters.items()) == list(
        wo.parameters.items()
    )
