"""Deterministic discrete-event production simulator.

Synthetic orders arrive over simulated days, automated center agents consume
assignment messages off the bus, hold each order for a seeded service time,
and publish completions that assign the next center.  Data-processing agents
additionally wait for the satellite's ancillary data record before starting.
Everything is driven by one event queue ordered by (time, insertion), and all
randomness comes from generators seeded out of the config, so a run is a pure
function of its ``SimConfig``: the same seed produces a byte-identical report
on any platform.

Quality control is automated by default (seeded accept/reject draws with a
rework cap); with ``auto_qc`` off, QC assignments are handed to an external
sink instead, which is how the live service mode routes them to human
operators.
"""

from __future__ import annotations

import heapq
import random
import tempfile
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Callable, Optional

from .bus import Broker, Subscription
from .interchange import from_xml, to_xml_bytes
from .store import OperationalStore
from .templates import apply_template
from .timebase import SECONDS_PER_DAY, date_for_day, fmt_ts
from .warehouse import visits_from_history, write_table
from .workorders import (
    CHAIN_ORDER,
    CorrectionLevel,
    DomainEvent,
    IdSequence,
    Media,
    Outcome,
    OrderStatus,
    ProductSpec,
    ProductType,
    RoutingRuleSet,
    WorkCenter,
    WorkOrder,
    advance,
    create_work_order,
    creation_events,
    default_rule_set,
    set_parameter,
)
from .xmlcore import XmlNode, parse, serialize

DEFAULT_SERVICE_TIMES: dict[WorkCenter, tuple[float, float]] = {
    # Placeholder ranges (simulated seconds); tune per deployment in the
    # config file, these are not calibrated against any real production line.
    WorkCenter.URP: (60.0, 300.0),
    WorkCenter.DP: (600.0, 1800.0),
    WorkCenter.VAL: (600.0, 1200.0),
    WorkCenter.FILM: (300.0, 900.0),
    WorkCenter.PHOTO: (300.0, 900.0),
    WorkCenter.QC: (120.0, 600.0),
    WorkCenter.DISPATCH: (30.0, 120.0),
}

REGIONS = ("NORTH", "SOUTH", "EAST", "WEST")


class ConfigError(Exception):
    pass


@dataclass
class SimConfig:
    seed: int = 42
    order_rate: int = 100  # orders per simulated day
    duration_days: int = 1
    center_service_times: dict[WorkCenter, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_SERVICE_TIMES)
    )
    manual_centers: frozenset[WorkCenter] = frozenset({WorkCenter.QC})
    auto_qc: bool = True  # seeded QC decisions; turn off to feed a console
    qc_reject_probability: float = 0.05
    qc_reject_target: WorkCenter = WorkCenter.DP
    rework_cap: int = 3
    adif_max_delay: float = 3600.0
    rules_file: Optional[str] = None

    def validate(self) -> None:
        if self.order_rate < 0 or self.duration_days < 0:
            raise ConfigError("order_rate and duration_days must be >= 0")
        if not 0.0 <= self.qc_reject_probability <= 1.0:
            raise ConfigError("qc_reject_probability must lie in [0, 1]")
        for center, (lo, hi) in self.center_service_times.items():
            if lo < 0 or lo > hi:
                raise ConfigError(f"service time range for {center.value} "
                                  f"must satisfy 0 <= min <= max")
        if self.rework_cap < 0:
            raise ConfigError("rework_cap must be >= 0")
        if self.adif_max_delay < 0:
            raise ConfigError("adif_max_delay must be >= 0")
        if self.qc_reject_target is WorkCenter.QC:
            raise ConfigError("qc_reject_target must precede QC")


def parse_sim_config(text: str) -> SimConfig:
    """``key = value`` lines; '#' comments.  Service times use
    ``service_time.DP = 600,1800``."""
    cfg = SimConfig()
    times = dict(DEFAULT_SERVICE_TIMES)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = key.strip(), value.strip()
        try:
            if key == "seed":
                cfg.seed = int(value)
            elif key == "order_rate":
                cfg.order_rate = int(value)
            elif key == "duration_days":
                cfg.duration_days = int(value)
            elif key == "qc_reject_probability":
                cfg.qc_reject_probability = float(value)
            elif key == "qc_reject_target":
                cfg.qc_reject_target = WorkCenter(value)
            elif key == "rework_cap":
                cfg.rework_cap = int(value)
            elif key == "adif_max_delay":
                cfg.adif_max_delay = float(value)
            elif key == "auto_qc":
                cfg.auto_qc = value.lower() in ("1", "true", "yes", "on")
            elif key == "manual_centers":
                cfg.manual_centers = frozenset(
                    WorkCenter(v.strip()) for v in value.split(",") if v.strip()
                )
            elif key == "rules_file":
                cfg.rules_file = value
            elif key.startswith("service_time."):
                center = WorkCenter(key.split(".", 1)[1])
                lo, hi = (float(v) for v in value.split(","))
                times[center] = (lo, hi)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    cfg.center_service_times = times
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Ancillary data


@dataclass(frozen=True)
class AdifRecord:
    satellite: str
    acquisition_date: str  # ISO form; one record per (satellite, date) per run
    orbit: int
    attitude_quality: str  # NOMINAL | DEGRADED

    @property
    def key(self) -> tuple[str, str]:
        return (self.satellite, self.acquisition_date)

    def to_xml_bytes(self) -> bytes:
        node = XmlNode(
            "adif",
            attributes={
                "satellite": self.satellite,
                "acquisition-date": self.acquisition_date,
                "orbit": str(self.orbit),
                "attitude-quality": self.attitude_quality,
            },
        )
        return serialize(node).encode("ascii")

    @staticmethod
    def from_xml_bytes(payload: bytes) -> "AdifRecord":
        node = parse(payload)
        return AdifRecord(
            satellite=node.attributes["satellite"],
            acquisition_date=node.attributes["acquisition-date"],
            orbit=int(node.attributes["orbit"]),
            attitude_quality=node.attributes["attitude-quality"],
        )


# ---------------------------------------------------------------------------
# Event queue and order generation


class EventQueue:
    """Time-ordered callbacks; ties run in insertion order."""

    def __init__(self):
        self._heap: list[tuple[float, int, Callable[[], None]]] = []
        self._counter = 0
        self.now = 0.0

    def push(self, at: float, fn: Callable[[], None]) -> None:
        heapq.heappush(self._heap, (at, self._counter, fn))
        self._counter += 1

    def pop(self) -> Callable[[], None]:
        at, _, fn = heapq.heappop(self._heap)
        if at < self.now:
            raise RuntimeError("time went backwards")
        self.now = at
        return fn

    def peek_time(self) -> Optional[float]:
        return self._heap[0][0] if self._heap else None

    def __len__(self) -> int:
        return len(self._heap)


@dataclass(frozen=True)
class OrderArrival:
    at: float
    spec: ProductSpec
    sales: tuple[tuple[str, str], ...]  # work-order parameters at intake


def generate_orders(cfg: SimConfig, rules: RoutingRuleSet) -> list[OrderArrival]:
    """The synthetic intake stream: reproducible from the seed alone,
    ``order_rate`` arrivals uniform over each simulated day, product fields
    drawn from the routing catalog."""
    rng = random.Random(cfg.seed)
    satellites = sorted(rules.catalog)
    arrivals: list[OrderArrival] = []
    for day in range(cfg.duration_days):
        times = sorted(
            rng.uniform(day * SECONDS_PER_DAY, (day + 1) * SECONDS_PER_DAY)
            for _ in range(cfg.order_rate)
        )
        for at in times:
            satellite = rng.choice(satellites)
            sensor = rng.choice(sorted(rules.catalog[satellite]))
            spec = ProductSpec(
                satellite=satellite,
                sensor=sensor,
                product_type=rng.choice(list(ProductType)),
                correction_level=rng.choice(list(CorrectionLevel)),
                media=rng.choice(list(Media)),
                path=rng.randint(1, 200),
                row=rng.randint(1, 200),
                acquisition_date=date_for_day(day) - timedelta(days=rng.randint(0, 20)),
            )
            customer_number = rng.randint(1, 20)
            sales = (
                ("customer", f"C{customer_number:03d}"),
                ("region", REGIONS[customer_number % len(REGIONS)]),
                ("amount", f"{rng.randint(50, 9999)}.{rng.randint(0, 99):02d}"),
                ("quantity", str(rng.randint(1, 5))),
            )
            arrivals.append(OrderArrival(at=at, spec=spec, sales=sales))
    return arrivals


def stream_to_bytes(arrivals: list[OrderArrival]) -> bytes:
    lines = []
    for a in arrivals:
        sales = ",".join(f"{k}={v}" for k, v in a.sales)
        lines.append(
            f"{fmt_ts(a.at)}|{a.spec.satellite}|{a.spec.sensor}"
            f"|{a.spec.product_type.value}|{a.spec.correction_level.value}"
            f"|{a.spec.media.value}|{a.spec.path}|{a.spec.row}"
            f"|{a.spec.acquisition_date.isoformat()}|{sales}"
        )
    return ("\n".join(lines) + "\n").encode("ascii")


# ---------------------------------------------------------------------------
# Center agents


class CenterAgent:
    """Automated work center: consumes assignments, runs timed steps."""

    def __init__(self, sim: "Simulation", center: WorkCenter):
        self.sim = sim
        self.center = center
        self.sub: Subscription = sim.broker.subscribe(
            f"agent-{center.value.lower()}",
            f"workorder.assigned.{center.value.lower()}",
        )

    def poll(self) -> bool:
        """Handle one queued assignment; True when a message was consumed."""
        msg = self.sim.broker.consume(self.sub, self.sim.queue.now, lease=120.0)
        if msg is None:
            return False
        self.handle_assignment(msg.payload, self.sim.queue.now)
        self.sim.broker.ack(self.sub, msg.id)
        return True

    def handle_assignment(self, payload: bytes, clock: float) -> None:
        """Validate the work-order payload and start the step.

        A payload that fails parsing/validation is dead-lettered: the message
        is dropped after flagging FAILED_INGEST on the order when its id is
        recoverable.  Stale or duplicate assignments (at-least-once delivery)
        are ignored; the store is the authority on current state.
        """
        try:
            payload_order = from_xml(payload)
        except Exception as exc:
            self.sim.dead_letters += 1
            self._flag_failed_ingest(payload, exc, clock)
            return
        try:
            wo = self.sim.store.load(payload_order.id)
        except Exception:
            self.sim.dead_letters += 1
            return
        if (
            wo.status is not OrderStatus.OPEN
            or wo.current_center() is not self.center
            or wo.plan.current_step().status.value != "PENDING"
        ):
            return  # duplicate or superseded assignment
        if self.center is WorkCenter.DP:
            key = (wo.spec.satellite, wo.spec.acquisition_date.isoformat())
            if key not in self.sim.adif:
                self.sim.waiting_for_adif.setdefault(key, []).append(wo.id)
                return  # parked until the ancillary data arrives
        self.sim.start_step(wo, self.center)

    def _flag_failed_ingest(self, payload: bytes, exc: Exception, clock: float) -> None:
        try:
            wo_id = parse(payload).attributes.get("id")
        except Exception:
            return
        if not wo_id or not self.sim.store.exists(wo_id):
            return
        wo = self.sim.store.load(wo_id)
        if wo.status is not OrderStatus.OPEN:
            return
        reason = "".join(ch for ch in str(exc) if " " <= ch <= "~")[:120]
        flagged = set_parameter(wo, "FAILED_INGEST", reason, clock)
        self.sim.store.record(flagged)


class Simulation:
    """One run: wiring of broker, store, agents, and the event queue."""

    def __init__(
        self,
        cfg: SimConfig,
        *,
        rules: Optional[RoutingRuleSet] = None,
        store: Optional[OperationalStore] = None,
        broker: Optional[Broker] = None,
        manual_sink: Optional[Callable[[str, WorkCenter, float], None]] = None,
    ):
        cfg.validate()
        self.cfg = cfg
        self.rules = rules or default_rule_set()
        self.broker = broker or Broker("sim")
        self._tmp = None
        if store is None:
            self._tmp = tempfile.TemporaryDirectory(prefix="orbitflow-sim-")
            store = OperationalStore(Path(self._tmp.name), fsync=False)
        self.store = store
        self.ids = IdSequence()
        self.queue = EventQueue()
        self.rng_service = random.Random(cfg.seed + 1_000_003)
        self.rng_qc = random.Random(cfg.seed + 2_000_003)
        self.rng_adif = random.Random(cfg.seed + 3_000_003)
        self.adif: dict[tuple[str, str], AdifRecord] = {}
        self.waiting_for_adif: dict[tuple[str, str], list[str]] = {}
        self._adif_scheduled: set[tuple[str, str]] = set()
        self.dead_letters = 0
        self.manual_sink = manual_sink
        self.manual_centers = (
            frozenset() if cfg.auto_qc else frozenset(cfg.manual_centers)
        )
        self.agents: dict[WorkCenter, CenterAgent] = {
            center: CenterAgent(self, center)
            for center in CHAIN_ORDER
            if center not in self.manual_centers
        }
        self.manual_subs: dict[WorkCenter, Subscription] = {
            center: self.broker.subscribe(
                f"manual-{center.value.lower()}",
                f"workorder.assigned.{center.value.lower()}",
            )
            for center in sorted(self.manual_centers, key=list(CHAIN_ORDER).index)
        }
        self.adif_sub = self.broker.subscribe("agent-dp-adif", "adif.ready")
        self.queue_trace: list[tuple[float, str, int]] = []
        self._trace_step = 3600.0
        self._next_trace = 0.0

    # -- wiring helpers --------------------------------------------------

    def publish_events(self, events: list[DomainEvent], wo: WorkOrder) -> None:
        payload = to_xml_bytes(wo)
        for event in events:
            self.broker.publish(event.topic, payload, self.queue.now)

    def intake(self, arrival: OrderArrival) -> WorkOrder:
        """Create, persist, and announce one new order; the first order for a
        (satellite, acquisition date) also schedules that ancillary record."""
        wo = create_work_order(arrival.spec, self.rules, self.queue.now, self.ids)
        self.store.save_new(wo)
        for key, value in arrival.sales:
            wo = set_parameter(wo, key, value, self.queue.now)
            self.store.record(wo)
        self._schedule_adif(arrival.spec)
        self.publish_events(creation_events(wo), wo)
        return wo

    def _schedule_adif(self, spec: ProductSpec) -> None:
        key = (spec.satellite, spec.acquisition_date.isoformat())
        if key in self._adif_scheduled:
            return
        self._adif_scheduled.add(key)
        delay = self.rng_adif.uniform(0.0, self.cfg.adif_max_delay)
        record = AdifRecord(
            satellite=key[0],
            acquisition_date=key[1],
            orbit=self.rng_adif.randint(1, 99_999),
            attitude_quality=(
                "NOMINAL" if self.rng_adif.random() < 0.9 else "DEGRADED"
            ),
        )
        self.queue.push(self.queue.now + delay,
                        lambda: self.deliver_adif(record))

    def start_step(self, wo: WorkOrder, center: WorkCenter) -> None:
        moved, events = advance(wo, Outcome.START, self.queue.now)
        self.store.record(moved)
        self.publish_events(events, moved)
        lo, hi = self.cfg.center_service_times[center]
        done_at = self.queue.now + self.rng_service.uniform(lo, hi)
        self.queue.push(done_at, lambda: self.finish_step(moved.id, center))

    def finish_step(self, order_id: str, center: WorkCenter) -> None:
        wo = self.store.load(order_id)
        if (
            wo.status is not OrderStatus.OPEN
            or wo.current_center() is not center
            or wo.plan.current_step().status.value != "IN_PROGRESS"
        ):
            return  # superseded (e.g. the order was rejected meanwhile)
        if center is WorkCenter.QC and self.cfg.auto_qc:
            if self.rng_qc.random() < self.cfg.qc_reject_probability:
                if wo.reject_count() >= self.cfg.rework_cap:
                    moved, events = advance(wo, Outcome.CANCEL, self.queue.now)
                else:
                    moved, events = advance(
                        wo, Outcome.REJECT, self.queue.now,
                        target=self.cfg.qc_reject_target,
                    )
            else:
                moved, events = advance(wo, Outcome.COMPLETE, self.queue.now)
        else:
            moved, events = advance(wo, Outcome.COMPLETE, self.queue.now)
        self.store.record(moved)
        self.publish_events(events, moved)

    def deliver_adif(self, record: AdifRecord) -> None:
        self.broker.publish("adif.ready", record.to_xml_bytes(), self.queue.now)

    def _absorb_adif(self) -> bool:
        consumed = False
        while (msg := self.broker.consume(self.adif_sub, self.queue.now,
                                          lease=120.0)) is not None:
            record = AdifRecord.from_xml_bytes(msg.payload)
            self.adif[record.key] = record
            self.broker.ack(self.adif_sub, msg.id)
            consumed = True
            for wo_id in self.waiting_for_adif.pop(record.key, []):
                wo = self.store.load(wo_id)
                if (
                    wo.status is OrderStatus.OPEN
                    and wo.current_center() is WorkCenter.DP
                    and wo.plan.current_step().status.value == "PENDING"
                ):
                    self.start_step(wo, WorkCenter.DP)
        return consumed

    def _absorb_manual(self) -> bool:
        consumed = False
        for center, sub in self.manual_subs.items():
            while (msg := self.broker.consume(sub, self.queue.now,
                                              lease=120.0)) is not None:
                consumed = True
                self.broker.ack(sub, msg.id)
                if self.manual_sink is not None:
                    try:
                        wo_id = parse(msg.payload).attributes["id"]
                    except Exception:
                        self.dead_letters += 1
                        continue
                    self.manual_sink(wo_id, center, self.queue.now)
        return consumed

    def dispatch(self) -> None:
        """Run agents to a fixpoint at the current instant."""
        busy = True
        while busy:
            busy = self._absorb_adif()
            for center in CHAIN_ORDER:
                agent = self.agents.get(center)
                if agent is None:
                    continue
                while agent.poll():
                    busy = True
            if self._absorb_manual():
                busy = True

    def external_transition(self, order_id: str, outcome: Outcome,
                            target: Optional[WorkCenter] = None,
                            clock: Optional[float] = None) -> WorkOrder:
        """Apply an operator decision (live mode) and keep the chain moving."""
        wo = self.store.load(order_id)
        at = self.queue.now if clock is None else max(clock, self.queue.now)
        moved, events = advance(wo, outcome, at, target=target)
        self.store.record(moved)
        self.publish_events(events, moved)
        return moved

    # -- main loop -------------------------------------------------------

    def schedule_all(self) -> list[OrderArrival]:
        arrivals = generate_orders(self.cfg, self.rules)
        for arrival in arrivals:
            self.queue.push(arrival.at, lambda a=arrival: self.intake(a))
        return arrivals

    def _record_trace(self, at: float) -> None:
        for center in CHAIN_ORDER:
            depth = len(self.store.list_open(center))
            self.queue_trace.append((at, center.value, depth))

    def step(self) -> bool:
        """Process the next queued event (plus its same-instant fallout)."""
        if not len(self.queue):
            return False
        next_time = self.queue.peek_time()
        while self._next_trace <= next_time:
            self._record_trace(self._next_trace)
            self._next_trace += self._trace_step
        fn = self.queue.pop()
        fn()
        self.dispatch()
        return True

    def run(self) -> "SimReport":
        self.schedule_all()
        self.dispatch()
        while self.step():
            pass
        return self.build_report()

    # -- reporting --------------------------------------------------------

    def build_report(self) -> "SimReport":
        orders = [self.store.load(wo_id) for wo_id in self.store.all_ids()]
        by_status = {status: 0 for status in OrderStatus}
        for wo in orders:
            by_status[wo.status] += 1
        tat: dict[WorkCenter, list[int]] = {}
        for wo in orders:
            for visit in visits_from_history(wo):
                tat.setdefault(visit.center, []).append(visit.duration_ms)
        center_tat = [
            (center.value, len(tat[center]),
             sum(tat[center]) / len(tat[center]) / 1000.0)
            for center in CHAIN_ORDER
            if center in tat
        ]
        order_rows = [
            [
                wo.id,
                wo.status.value,
                fmt_ts(wo.created_at),
                fmt_ts(wo.history[-1].at),
                str(wo.reject_count()),
                wo.spec.satellite,
                wo.spec.sensor,
                wo.spec.product_type.value,
                wo.spec.media.value,
            ]
            for wo in orders
        ]
        return SimReport(
            seed=self.cfg.seed,
            created=len(orders),
            completed=by_status[OrderStatus.COMPLETED],
            cancelled=by_status[OrderStatus.CANCELLED],
            open=by_status[OrderStatus.OPEN],
            dead_letters=self.dead_letters,
            center_tat=center_tat,
            queue_trace=list(self.queue_trace),
            audit=self.broker.audit(),
            order_rows=order_rows,
        )

    def close(self) -> None:
        self.store.close()
        if self._tmp is not None:
            self._tmp.cleanup()


SUMMARY_TEMPLATE = (
    "production run (seed {/sim-report@seed})\n"
    "orders: created={/sim-report/orders@created}"
    " completed={/sim-report/orders@completed}"
    " cancelled={/sim-report/orders@cancelled}"
    " open={/sim-report/orders@open}\n"
    "dead letters: {/sim-report/orders@dead_letters}\n"
    "center turn-around times:\n"
    "{for /sim-report/center-tat/center}"
    "  {center@code}: visits={center@visits} mean_s={center@mean_seconds}\n"
    "{end}"
    "messages: published={/sim-report/messages@published}"
    " acked={/sim-report/messages@acked}\n"
)


@dataclass
class SimReport:
    seed: int
    created: int
    completed: int
    cancelled: int
    open: int
    dead_letters: int
    center_tat: list[tuple[str, int, float]]
    queue_trace: list[tuple[float, str, int]]
    audit: dict
    order_rows: list[list[str]]

    def conserved(self) -> bool:
        return self.created == self.completed + self.cancelled + self.open

    def to_xml(self) -> XmlNode:
        acked = sum(
            s["acked"] for s in self.audit["subscriptions"].values()
        )
        centers = [
            XmlNode("center", attributes={
                "code": code,
                "visits": str(visits),
                "mean_seconds": f"{mean:.3f}",
            })
            for code, visits, mean in self.center_tat
        ]
        return XmlNode(
            "sim-report",
            attributes={"seed": str(self.seed)},
            children=[
                XmlNode("orders", attributes={
                    "created": str(self.created),
                    "completed": str(self.completed),
                    "cancelled": str(self.cancelled),
                    "open": str(self.open),
                    "dead_letters": str(self.dead_letters),
                }),
                XmlNode("center-tat", children=centers),
                XmlNode("messages", attributes={
                    "published": str(self.audit["published_total"]),
                    "acked": str(acked),
                }),
            ],
        )

    def summary(self) -> str:
        return apply_template(self.to_xml(), SUMMARY_TEMPLATE)

    def tables(self) -> dict[str, tuple[list[str], list[list[str]]]]:
        return {
            "orders": (
                ["id", "status", "created", "finished", "rejects",
                 "satellite", "sensor", "product_type", "media"],
                self.order_rows,
            ),
            "center_tat": (
                ["center", "visits", "mean_seconds"],
                [[c, str(v), f"{m:.6f}"] for c, v, m in self.center_tat],
            ),
            "queue_trace": (
                ["time", "center", "depth"],
                [[fmt_ts(t), c, str(d)] for t, c, d in self.queue_trace],
            ),
            "messages": (
                ["topic", "published"],
                [[topic, str(n)]
                 for topic, n in self.audit["published"].items()],
            ),
            "subscriptions": (
                ["subscription", "delivered", "acked", "queued", "inflight"],
                [
                    [name, str(s["delivered"]), str(s["acked"]),
                     str(s["queued"]), str(s["inflight"])]
                    for name, s in self.audit["subscriptions"].items()
                ],
            ),
        }

    def to_bytes(self) -> bytes:
        """Canonical byte form; equal configs must produce equal bytes."""
        chunks = [self.summary()]
        for name, (columns, rows) in self.tables().items():
            chunks.append(f"== {name} ==")
            chunks.append("\t".join(columns))
            chunks.extend("\t".join(row) for row in rows)
        return ("\n".join(chunks) + "\n").encode("ascii")

    def write(self, out_dir: Path) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "summary.txt").write_text(self.summary(), encoding="ascii")
        for name, (columns, rows) in self.tables().items():
            write_table(out_dir / f"{name}.tsv", columns, rows)


def run_simulation(
    cfg: SimConfig,
    *,
    rules: Optional[RoutingRuleSet] = None,
    store_dir: Optional[Path] = None,
    report_dir: Optional[Path] = None,
) -> SimReport:
    """Run one full deterministic simulation and optionally write the report."""
    store = None
    if store_dir is not None:
        store = OperationalStore(Path(store_dir), fsync=False)
    sim = Simulation(cfg, rules=rules, store=store)
    try:
        report = sim.run()
    finally:
        sim.close()
    if report_dir is not None:
        report.write(Path(report_dir))
    return report
