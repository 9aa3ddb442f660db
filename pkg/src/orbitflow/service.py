"""Service layer: registry, manual task queue, and the HTTP/JSON facade.

Everything the production chain can do is exposed as a named, versioned
service over HTTP so that operator consoles and external clients need no
knowledge of the engine underneath: work-order intake and inspection (JSON,
or the canonical XML via content negotiation), claim/complete task queues for
human-operated centers, management reports, and warehouse queries.

State-changing endpoints honor a client-supplied ``Request-Id`` header:
a retried request with the same id returns the recorded response instead of
re-executing, so network retries cannot double-advance an order.  Task claims
hold a lease; completing a task after the lease expired returns 410 and the
task goes back to the pool.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from datetime import date
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Optional

from . import workorders as wo_mod
from .bus import Broker
from .interchange import to_xml_text
from .sim import OrderArrival, SimConfig, Simulation
from .store import NotFound, OperationalStore
from .warehouse import (
    QUERY_MEASURES,
    ProductSalesWarehouse,
    UnknownAttribute,
    WarehouseQuery,
)
from .workorders import (
    CorrectionLevel,
    Media,
    Outcome,
    OrderStatus,
    ProductSpec,
    ProductType,
    StepStatus,
    WorkCenter,
    WorkOrder,
)

logger = logging.getLogger("orbitflow.service")

DEFAULT_PORT = 8080
DEFAULT_TASK_LEASE = 600.0  # ten minutes
PAGE_SIZE_DEFAULT = 50
PAGE_SIZE_MAX = 500


class ServiceError(Exception):
    pass


class DuplicateRegistration(ServiceError):
    pass


# ---------------------------------------------------------------------------
# Service registry


@dataclass(frozen=True)
class ServiceDescriptor:
    name: str
    version: str  # semver
    endpoint: str
    description: str = ""

    def version_key(self) -> tuple[int, ...]:
        try:
            return tuple(int(p) for p in self.version.split("."))
        except ValueError:
            raise ServiceError(f"bad semver {self.version!r}") from None


class ServiceRegistry:
    def __init__(self):
        self._entries: dict[tuple[str, str], ServiceDescriptor] = {}
        self._lock = threading.Lock()

    def register(self, descriptor: ServiceDescriptor) -> None:
        descriptor.version_key()
        with self._lock:
            key = (descriptor.name, descriptor.version)
            if key in self._entries:
                raise DuplicateRegistration(f"{key} already registered")
            self._entries[key] = descriptor

    def lookup(self, name: str) -> list[ServiceDescriptor]:
        """All versions of ``name``, newest first."""
        with self._lock:
            found = [d for (n, _), d in self._entries.items() if n == name]
        return sorted(found, key=lambda d: d.version_key(), reverse=True)

    def snapshot(self) -> list[ServiceDescriptor]:
        with self._lock:
            entries = list(self._entries.values())
        return sorted(entries, key=lambda d: (d.name, d.version_key()))


# ---------------------------------------------------------------------------
# Manual task queue


@dataclass
class TaskClaim:
    task_id: str
    work_order_id: str
    center: WorkCenter
    operator_id: str
    claimed_at: float
    lease_until: float


@dataclass
class ManualTask:
    task_id: str
    work_order_id: str
    center: WorkCenter
    created_at: float
    claim: Optional[TaskClaim] = None


class ClaimConflict(ServiceError):
    pass


class LeaseExpired(ServiceError):
    pass


class TaskQueue:
    """Claim/lease queue for human-operated centers; one live claim per task."""

    def __init__(self, clock: Callable[[], float],
                 lease_seconds: float = DEFAULT_TASK_LEASE):
        self.clock = clock
        self.lease_seconds = lease_seconds
        self._tasks: dict[str, ManualTask] = {}
        self._next = 1
        self._lock = threading.RLock()

    def add(self, work_order_id: str, center: WorkCenter, at: float) -> ManualTask:
        with self._lock:
            for task in self._tasks.values():
                if task.work_order_id == work_order_id and task.center is center:
                    return task  # an assignment replay must not duplicate tasks
            task = ManualTask(
                task_id=f"T-{self._next:06d}",
                work_order_id=work_order_id,
                center=center,
                created_at=at,
            )
            self._next += 1
            self._tasks[task.task_id] = task
            return task

    def get(self, task_id: str) -> Optional[ManualTask]:
        with self._lock:
            return self._tasks.get(task_id)

    def _claim_live(self, task: ManualTask) -> bool:
        return task.claim is not None and task.claim.lease_until > self.clock()

    def unclaimed(self, center: Optional[WorkCenter] = None) -> list[ManualTask]:
        with self._lock:
            return [
                t for t in self._tasks.values()
                if (center is None or t.center is center) and not self._claim_live(t)
            ]

    def claim(self, task_id: str, operator_id: str) -> TaskClaim:
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise KeyError(task_id)
            if self._claim_live(task) and task.claim.operator_id != operator_id:
                raise ClaimConflict(
                    f"task {task_id} is claimed by {task.claim.operator_id!r}"
                )
            now = self.clock()
            task.claim = TaskClaim(
                task_id=task_id,
                work_order_id=task.work_order_id,
                center=task.center,
                operator_id=operator_id,
                claimed_at=now,
                lease_until=now + self.lease_seconds,
            )
            return task.claim

    def check_claim(self, task_id: str, operator_id: str) -> ManualTask:
        """The claim the completer must hold; raises on conflict or expiry."""
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise KeyError(task_id)
            claim = task.claim
            if claim is None or claim.operator_id != operator_id:
                raise ClaimConflict(f"task {task_id} is not claimed by "
                                    f"{operator_id!r}")
            if claim.lease_until <= self.clock():
                task.claim = None  # back to the pool
                raise LeaseExpired(f"lease on {task_id} expired")
            return task

    def finish(self, task_id: str) -> None:
        with self._lock:
            self._tasks.pop(task_id, None)

    def all_tasks(self) -> list[ManualTask]:
        with self._lock:
            return list(self._tasks.values())


# ---------------------------------------------------------------------------
# Live system: simulator + store + broker + warehouse behind one lock


class LiveSystem:
    """One running production system, drivable by HTTP and/or the simulator."""

    def __init__(
        self,
        cfg: SimConfig,
        *,
        rules=None,
        data_dir: Optional[Path] = None,
        console_dir: Optional[Path] = None,
    ):
        self.cfg = cfg
        store = None
        if data_dir is not None:
            store = OperationalStore(Path(data_dir) / "ops")
        self.broker = Broker("live")
        self.sim = Simulation(
            cfg,
            rules=rules,
            store=store,
            broker=self.broker,
            manual_sink=self._on_manual_assignment,
        )
        self.store = self.sim.store
        self.rules = self.sim.rules
        self.warehouse = ProductSalesWarehouse()
        self._wall_anchor = time.monotonic()
        self._sim_anchor = 0.0
        self.tasks = TaskQueue(clock=self.live_now)
        self.registry = ServiceRegistry()
        self.console_dir = console_dir
        self._lock = threading.RLock()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self._register_builtin_services()

    def _register_builtin_services(self) -> None:
        for name, endpoint, description in (
            ("workorder", "/work-orders", "order intake, inspection, listing"),
            ("tasks", "/tasks", "manual task claim/complete queue"),
            ("reports", "/reports", "pending, completed, and TAT reports"),
            ("warehouse", "/warehouse", "analytical queries and ETL trigger"),
            ("status", "/status", "clock and order counters"),
            ("console", "/console", "operator console static bundle"),
        ):
            self.registry.register(
                ServiceDescriptor(name, "1.0.0", endpoint, description)
            )

    # -- clocks -----------------------------------------------------------

    def live_now(self) -> float:
        """Simulated now, advanced by wall time while the queue is idle
        (leases must keep aging even when no simulation event fires)."""
        drifted = self._sim_anchor + (time.monotonic() - self._wall_anchor)
        return max(self.sim.queue.now, drifted)

    def _reanchor(self) -> None:
        self._sim_anchor = self.sim.queue.now
        self._wall_anchor = time.monotonic()

    # -- simulator plumbing -------------------------------------------------

    def _on_manual_assignment(self, work_order_id: str, center: WorkCenter,
                              at: float) -> None:
        self.tasks.add(work_order_id, center, at)

    def drain(self) -> None:
        """Run the simulation until no event is pending (manual tasks wait)."""
        with self._lock:
            self.sim.dispatch()
            while self.sim.step():
                pass
            self._reanchor()

    def start_background(self, poll_seconds: float = 0.02) -> None:
        def loop():
            while not self._stop.is_set():
                self.drain()
                time.sleep(poll_seconds)

        self._thread = threading.Thread(target=loop, name="orbitflow-sim",
                                        daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        self.sim.close()

    # -- operations used by the HTTP layer ----------------------------------

    def submit_order(self, spec: ProductSpec, parameters: dict[str, str]) -> WorkOrder:
        with self._lock:
            arrival = OrderArrival(
                at=self.sim.queue.now,
                spec=spec,
                sales=tuple(parameters.items()),
            )
            wo = self.sim.intake(arrival)
            self.sim.dispatch()
            return self.store.load(wo.id)

    def claim_task(self, task_id: str, operator_id: str) -> TaskClaim:
        with self._lock:
            claim = self.tasks.claim(task_id, operator_id)
            task = self.tasks.get(task_id)
            wo = self.store.load(task.work_order_id)
            if (
                wo.status is OrderStatus.OPEN
                and wo.current_center() is task.center
                and wo.plan.current_step().status is StepStatus.PENDING
            ):
                self.sim.external_transition(wo.id, Outcome.START)
                self.sim.dispatch()
            return claim

    def complete_task(self, task_id: str, operator_id: str, outcome: str,
                      reject_target: Optional[str], note: Optional[str]) -> WorkOrder:
        with self._lock:
            task = self.tasks.check_claim(task_id, operator_id)
            wo = self.store.load(task.work_order_id)
            if note:
                wo = wo_mod.set_parameter(wo, "qc_note", note, self.sim.queue.now)
                self.store.record(wo)
            if outcome == "COMPLETE":
                moved = self.sim.external_transition(wo.id, Outcome.COMPLETE)
            else:
                target = WorkCenter(reject_target)
                moved = self.sim.external_transition(
                    wo.id, Outcome.REJECT, target=target
                )
            self.tasks.finish(task_id)
            self.sim.dispatch()
            while self.sim.step():
                pass
            self._reanchor()
            return moved

    def pending_report(self) -> tuple[list[str], list[list]]:
        rows = []
        for center in WorkCenter:
            rows.append([center.value, len(self.store.list_open(center))])
        return ["center", "count"], rows

    def run_etl(self, wrinkle: Optional[float], now: Optional[float]):
        if now is None:
            now = self.live_now()
        if wrinkle is None:
            return self.warehouse.etl_run(self.store, now=now)
        return self.warehouse.etl_run(self.store, wrinkle=wrinkle, now=now)

    def status(self) -> dict:
        orders = [self.store.load(i) for i in self.store.all_ids()]
        counts = {status.value: 0 for status in OrderStatus}
        for wo in orders:
            counts[wo.status.value] += 1
        return {
            "sim_now": self.sim.queue.now,
            "live_now": self.live_now(),
            "orders": {
                "created": len(orders),
                "open": counts["OPEN"],
                "completed": counts["COMPLETED"],
                "cancelled": counts["CANCELLED"],
            },
            "pending_events": len(self.sim.queue),
            "manual_tasks": len(self.tasks.all_tasks()),
        }


# ---------------------------------------------------------------------------
# JSON rendering


def order_to_json(wo: WorkOrder) -> dict:
    return {
        "id": wo.id,
        "status": wo.status.value,
        "created": wo.created_at,
        "spec": {
            "satellite": wo.spec.satellite,
            "sensor": wo.spec.sensor,
            "product_type": wo.spec.product_type.value,
            "correction_level": wo.spec.correction_level.value,
            "media": wo.spec.media.value,
            "path": wo.spec.path,
            "row": wo.spec.row,
            "acquisition_date": wo.spec.acquisition_date.isoformat(),
        },
        "plan": {
            "current": wo.plan.current_index,
            "steps": [
                {
                    "index": s.index,
                    "center": s.center.value,
                    "status": s.status.value,
                    "entered": s.entered_at,
                    "exited": s.exited_at,
                }
                for s in wo.plan.steps
            ],
        },
        "parameters": dict(wo.parameters),
        "history": [
            {
                "seq": e.seq,
                "type": e.kind.value,
                "center": e.center.value,
                "at": e.at,
                "note": e.note,
            }
            for e in wo.history
        ],
    }


def spec_from_json(body: dict) -> ProductSpec:
    try:
        return ProductSpec(
            satellite=str(body["satellite"]),
            sensor=str(body["sensor"]),
            product_type=ProductType(body["product_type"]),
            correction_level=CorrectionLevel(body["correction_level"]),
            media=Media(body["media"]),
            path=int(body["path"]),
            row=int(body["row"]),
            acquisition_date=date.fromisoformat(body["acquisition_date"]),
        )
    except KeyError as exc:
        raise ValueError(f"missing product field {exc.args[0]!r}") from None


# ---------------------------------------------------------------------------
# HTTP server


class ApiServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, system: LiveSystem, port: int = 0, host: str = "127.0.0.1"):
        super().__init__((host, port), ApiHandler)
        self.system = system
        self.idempotency: dict[str, tuple[int, str, bytes]] = {}
        self.idempotency_lock = threading.Lock()

    @property
    def port(self) -> int:
        return self.server_address[1]


class ApiHandler(BaseHTTPRequestHandler):
    server: ApiServer
    protocol_version = "HTTP/1.1"

    # -- plumbing -----------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet the default stderr chatter
        pass

    def _finish(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)
        millis = (time.monotonic() - self._started) * 1000.0
        logger.info(
            "%s %s %s %d %.1fms",
            time.strftime("%Y-%m-%dT%H:%M:%S"),
            self.command,
            self.path,
            status,
            millis,
        )

    def _json(self, status: int, payload) -> None:
        body = json.dumps(payload, sort_keys=False).encode("ascii")
        self._record_idempotent(status, "application/json", body)
        self._finish(status, body, "application/json")

    def _error(self, status: int, code: str, message: str, detail=None) -> None:
        self._json(status, {"code": code, "message": message, "detail": detail})

    def _xml(self, status: int, text: str) -> None:
        body = text.encode("ascii")
        self._record_idempotent(status, "application/xml", body)
        self._finish(status, body, "application/xml")

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw or b"{}")
        except json.JSONDecodeError:
            raise ValueError("request body is not valid JSON") from None
        if not isinstance(body, dict):
            raise ValueError("request body must be a JSON object")
        return body

    def _request_id(self) -> Optional[str]:
        return self.headers.get("Request-Id") or self.headers.get("request_id")

    def _replay_idempotent(self) -> bool:
        rid = self._request_id()
        if rid is None:
            return False
        with self.server.idempotency_lock:
            hit = self.server.idempotency.get(rid)
        if hit is None:
            return False
        # Drain the unread request body so the keep-alive stream stays sound.
        length = int(self.headers.get("Content-Length") or 0)
        if length:
            self.rfile.read(length)
        status, content_type, body = hit
        self._finish(status, body, content_type)
        return True

    def _record_idempotent(self, status: int, content_type: str,
                           body: bytes) -> None:
        if self.command != "POST":
            return
        rid = self._request_id()
        if rid is None:
            return
        with self.server.idempotency_lock:
            self.server.idempotency.setdefault(rid, (status, content_type, body))

    # -- routing ------------------------------------------------------------

    def do_GET(self):
        self._started = time.monotonic()
        try:
            self._route_get()
        except Exception as exc:  # pragma: no cover - last-resort guard
            logger.exception("GET %s failed", self.path)
            self._error(500, "internal", str(exc))

    def do_POST(self):
        self._started = time.monotonic()
        try:
            if self._replay_idempotent():
                return
            self._route_post()
        except ValueError as exc:
            self._error(400, "validation", str(exc))
        except Exception as exc:  # pragma: no cover - last-resort guard
            logger.exception("POST %s failed", self.path)
            self._error(500, "internal", str(exc))

    def _split(self) -> tuple[str, dict[str, str]]:
        path, _, query = self.path.partition("?")
        params = {}
        for pair in query.split("&"):
            if not pair:
                continue
            key, _, value = pair.partition("=")
            params[key] = _url_unquote(value)
        return path, params

    def _route_get(self):
        system = self.server.system
        path, params = self._split()
        if path == "/services":
            return self._json(200, {
                "services": [
                    {"name": d.name, "version": d.version,
                     "endpoint": d.endpoint, "description": d.description}
                    for d in system.registry.snapshot()
                ]
            })
        if path == "/status":
            return self._json(200, system.status())
        if path == "/work-orders":
            return self._list_orders(params)
        m = re.fullmatch(r"/work-orders/([A-Za-z0-9\-]+)", path)
        if m:
            return self._get_order(m.group(1))
        if path == "/tasks":
            center = None
            if params.get("center"):
                try:
                    center = WorkCenter(params["center"])
                except ValueError:
                    return self._error(400, "validation",
                                       f"unknown center {params['center']!r}")
            tasks = system.tasks.unclaimed(center)
            tasks.sort(key=lambda t: t.task_id)
            return self._json(200, {
                "tasks": [
                    {"task_id": t.task_id, "work_order_id": t.work_order_id,
                     "center": t.center.value, "created_at": t.created_at}
                    for t in tasks
                ]
            })
        if path == "/reports/pending":
            columns, rows = system.pending_report()
            return self._json(200, {"columns": columns, "rows": rows,
                                    "total": sum(r[1] for r in rows)})
        if path == "/reports/tat":
            by = params.get("by", "center")
            if by.upper() not in ("CENTER", "PRODUCT_TYPE"):
                return self._error(400, "validation",
                                   "by must be center or product_type")
            columns, rows = system.warehouse.report_tat(by)
            return self._json(200, {"columns": columns, "rows": rows})
        if path == "/reports/completed":
            try:
                t_from = float(params.get("from", "0"))
                t_to = float(params.get("to", str(2**53)))
            except ValueError:
                return self._error(400, "validation", "from/to must be numbers")
            ids = system.store.completed_between(t_from, t_to)
            return self._json(200, {"from": t_from, "to": t_to,
                                    "orders": ids, "count": len(ids)})
        if path == "/console" or path.startswith("/console/"):
            return self._serve_console(path)
        if path == "/":
            self.send_response(307)
            self.send_header("Location", "/console/")
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        return self._error(404, "not-found", f"no route for {path}")

    def _route_post(self):
        system = self.server.system
        path, _ = self._split()
        if path == "/work-orders":
            body = self._read_json()
            spec = spec_from_json(body)
            parameters = body.get("parameters") or {}
            if not isinstance(parameters, dict):
                raise ValueError("parameters must be an object")
            try:
                wo = system.submit_order(
                    spec, {str(k): str(v) for k, v in parameters.items()}
                )
            except wo_mod.WorkOrderError as exc:
                return self._error(400, "validation", str(exc))
            return self._json(201, order_to_json(wo))
        m = re.fullmatch(r"/tasks/([A-Za-z0-9\-]+)/claim", path)
        if m:
            body = self._read_json()
            operator = str(body.get("operator_id") or "")
            if not operator:
                raise ValueError("operator_id is required")
            try:
                claim = system.claim_task(m.group(1), operator)
            except KeyError:
                return self._error(404, "not-found", f"no task {m.group(1)}")
            except ClaimConflict as exc:
                return self._error(409, "claim-conflict", str(exc))
            return self._json(200, {
                "task_id": claim.task_id,
                "work_order_id": claim.work_order_id,
                "center": claim.center.value,
                "operator_id": claim.operator_id,
                "claimed_at": claim.claimed_at,
                "lease_until": claim.lease_until,
            })
        m = re.fullmatch(r"/tasks/([A-Za-z0-9\-]+)/complete", path)
        if m:
            return self._complete_task(m.group(1))
        if path == "/warehouse/query":
            return self._warehouse_query()
        if path == "/warehouse/etl":
            body = self._read_json()
            wrinkle = body.get("wrinkle")
            now = body.get("now")
            report = system.run_etl(
                float(wrinkle) if wrinkle is not None else None,
                float(now) if now is not None else None,
            )
            return self._json(200, {"facts_added": report.facts_added,
                                    "rows_skipped": report.rows_skipped})
        return self._error(404, "not-found", f"no route for {path}")

    # -- endpoint bodies ------------------------------------------------

    def _list_orders(self, params: dict[str, str]):
        system = self.server.system
        status = params.get("status")
        center = params.get("center")
        try:
            page = max(1, int(params.get("page", "1")))
            page_size = min(PAGE_SIZE_MAX,
                            max(1, int(params.get("page_size",
                                                  str(PAGE_SIZE_DEFAULT)))))
        except ValueError:
            return self._error(400, "validation", "bad page/page_size")
        if status is not None:
            try:
                status = OrderStatus(status)
            except ValueError:
                return self._error(400, "validation", f"unknown status {status!r}")
        if center is not None:
            try:
                center = WorkCenter(center)
            except ValueError:
                return self._error(400, "validation", f"unknown center {center!r}")
        ids = system.store.all_ids()
        selected = []
        for wo_id in ids:
            wo = system.store.load(wo_id)
            if status is not None and wo.status is not status:
                continue
            if center is not None and wo.current_center() is not center:
                continue
            selected.append(wo)
        start = (page - 1) * page_size
        page_items = selected[start : start + page_size]
        return self._json(200, {
            "page": page,
            "page_size": page_size,
            "total": len(selected),
            "orders": [
                {
                    "id": wo.id,
                    "status": wo.status.value,
                    "center": (wo.current_center().value
                               if wo.current_center() else None),
                    "created": wo.created_at,
                }
                for wo in page_items
            ],
        })

    def _get_order(self, wo_id: str):
        system = self.server.system
        try:
            wo = system.store.load(wo_id)
        except NotFound:
            return self._error(404, "not-found", f"no work order {wo_id}")
        accept = self.headers.get("Accept", "")
        if "application/xml" in accept:
            return self._xml(200, to_xml_text(wo))
        return self._json(200, order_to_json(wo))

    def _complete_task(self, task_id: str):
        system = self.server.system
        body = self._read_json()
        operator = str(body.get("operator_id") or "")
        outcome = str(body.get("outcome") or "")
        target = body.get("reject_target")
        note = body.get("note")
        if not operator:
            raise ValueError("operator_id is required")
        if outcome not in ("COMPLETE", "REJECT"):
            raise ValueError("outcome must be COMPLETE or REJECT")
        if outcome == "REJECT":
            if not target:
                return self._error(400, "validation",
                                   "REJECT requires reject_target")
            try:
                WorkCenter(target)
            except ValueError:
                return self._error(400, "validation",
                                   f"unknown center {target!r}")
        try:
            moved = system.complete_task(task_id, operator, outcome, target,
                                         str(note) if note else None)
        except KeyError:
            return self._error(404, "not-found", f"no task {task_id}")
        except ClaimConflict as exc:
            return self._error(409, "claim-conflict", str(exc))
        except LeaseExpired as exc:
            return self._error(410, "lease-expired", str(exc))
        except wo_mod.WorkOrderError as exc:
            return self._error(400, "validation", str(exc))
        return self._json(200, order_to_json(moved))

    def _warehouse_query(self):
        system = self.server.system
        body = self._read_json()
        group_by = body.get("group_by") or []
        measure_name = str(body.get("measure") or "COUNT")
        filters_raw = body.get("filters") or {}
        if measure_name not in QUERY_MEASURES:
            raise ValueError(
                f"measure must be one of {sorted(QUERY_MEASURES)}"
            )
        if isinstance(filters_raw, dict):
            filters = tuple((str(k), str(v)) for k, v in filters_raw.items())
        elif isinstance(filters_raw, list):
            pairs = []
            for item in filters_raw:
                text = str(item)
                key, eq, value = text.partition("=")
                if not eq:
                    raise ValueError(f"bad filter {text!r}; use attr=value")
                pairs.append((key, value))
            filters = tuple(pairs)
        else:
            raise ValueError("filters must be an object or a list of attr=value")
        query = WarehouseQuery(
            group_by=tuple(str(a) for a in group_by),
            measure=QUERY_MEASURES[measure_name],
            filters=filters,
        )
        try:
            rows = system.warehouse.query(query)
        except UnknownAttribute as exc:
            raise ValueError(str(exc)) from None
        return self._json(200, {
            "columns": list(query.group_by) + [measure_name],
            "units": "cents" if measure_name == "SUM_AMOUNT" else None,
            "rows": [list(key) + [value] for key, value in rows],
        })

    def _serve_console(self, path: str):
        root = self.server.system.console_dir
        if root is None:
            return self._error(404, "not-found",
                               "console bundle not configured "
                               "(set ORBITFLOW_CONSOLE_DIR)")
        root = Path(root).resolve()
        rel = path[len("/console"):].lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            return self._error(404, "not-found", f"no console file {rel}")
        content_types = {
            ".html": "text/html", ".js": "text/javascript",
            ".css": "text/css", ".map": "application/json",
            ".svg": "image/svg+xml", ".json": "application/json",
        }
        ctype = content_types.get(target.suffix, "application/octet-stream")
        self._finish(200, target.read_bytes(), ctype)


def _url_unquote(text: str) -> str:
    from urllib.parse import unquote_plus

    return unquote_plus(text)


def serve(system: LiveSystem, port: int = 0,
          host: str = "127.0.0.1") -> ApiServer:
    """Start the HTTP facade on ``port`` (0 picks a free one)."""
    server = ApiServer(system, port=port, host=host)
    thread = threading.Thread(target=server.serve_forever,
                              name="orbitflow-http", daemon=True)
    thread.start()
    return server


def main() -> None:
    """Stand-alone service: an empty manual-mode system fed over HTTP."""
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    port = int(os.environ.get("ORBITFLOW_PORT", str(DEFAULT_PORT)))
    cfg_path = os.environ.get("ORBITFLOW_CONFIG")
    if cfg_path:
        from .sim import parse_sim_config

        cfg = parse_sim_config(Path(cfg_path).read_text(encoding="ascii"))
    else:
        cfg = SimConfig(order_rate=0, duration_days=0, auto_qc=False)
    console = os.environ.get("ORBITFLOW_CONSOLE_DIR")
    system = LiveSystem(
        cfg, console_dir=Path(console) if console else _default_console_dir()
    )
    system.start_background()
    server = ApiServer(system, port=port)
    print(f"orbitflow service on http://127.0.0.1:{server.port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        system.stop()


def _default_console_dir() -> Optional[Path]:
    for candidate in (Path.cwd() / "frontend" / "dist",
                      Path(__file__).resolve().parents[2] / "frontend" / "dist"):
        if candidate.is_dir():
            return candidate
    return None


if __name__ == "__main__":
    main()
