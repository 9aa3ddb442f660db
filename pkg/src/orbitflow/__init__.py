"""orbitflow: a production-chain work-order engine.

Subsystems, each usable on its own:

- :mod:`orbitflow.workorders` — routing rules and the order state machine
- :mod:`orbitflow.bus` — durable publish/subscribe broker with an event router
- :mod:`orbitflow.xmlcore` / :mod:`orbitflow.xmlschema` /
  :mod:`orbitflow.templates` / :mod:`orbitflow.interchange` — XML interchange,
  validation, path queries, and report templating
- :mod:`orbitflow.store` — append-only operational store with replay recovery
- :mod:`orbitflow.warehouse` — star/snowflake analytics with ETL and reports
- :mod:`orbitflow.sim` — deterministic discrete-event production simulator
- :mod:`orbitflow.service` — service registry, task queue, and HTTP facade
"""

__version__ = "0.1.0"

from .workorders import (  # noqa: F401
    CorrectionLevel,
    DomainEvent,
    EventKind,
    IdSequence,
    Media,
    Outcome,
    OrderStatus,
    ProductSpec,
    ProductType,
    RoutingPlan,
    RoutingRuleSet,
    StepStatus,
    TransitionEvent,
    WorkCenter,
    WorkOrder,
    advance,
    create_work_order,
    default_rule_set,
    plan_route,
    set_parameter,
)
