"""Append-only operational persistence for work orders.

The store is a journal of transition events, one canonical-XML record per
line, so plain text tools can inspect it.  Every order's current state is the
fold of its events via the work-order replay; the store keeps that fold
materialized in memory and rebuilds it on open.  Appends are durable before
they return (flush + fsync) and carry the writer's expected sequence number,
so two racing writers on one order resolve to exactly one winner.

Compaction moves closed orders out of the journal into ``snapshot-<lsn>.xml``
files holding their full serialized form; every query observes the same
answers before and after.  Recovery tolerates a torn tail write by truncating
the journal at the first damaged line.
"""

from __future__ import annotations

import os
import threading
from pathlib import Path
from typing import Optional

from . import workorders as wo_mod
from .interchange import SchemaViolation, SemanticError, from_xml, to_xml
from .timebase import fmt_ts, parse_ts
from .workorders import (
    EventKind,
    OrderStatus,
    TransitionEvent,
    WorkCenter,
    WorkOrder,
)
from .xmlcore import NotWellFormed, XmlNode, parse, serialize


class StoreError(Exception):
    pass


class SequenceConflict(StoreError):
    """A concurrent writer recorded this sequence number first."""


class NotFound(StoreError):
    pass


def _event_node(event: TransitionEvent) -> XmlNode:
    attrs = {
        "seq": str(event.seq),
        "type": event.kind.value,
        "center": event.center.value,
        "at": fmt_ts(event.at),
    }
    if event.note != "":
        attrs["note"] = event.note
    return XmlNode("event", attributes=attrs)


def _event_from_node(node: XmlNode) -> TransitionEvent:
    return TransitionEvent(
        seq=int(node.attributes["seq"]),
        kind=EventKind(node.attributes["type"]),
        center=WorkCenter(node.attributes["center"]),
        at=parse_ts(node.attributes["at"]),
        note=node.attributes.get("note", ""),
    )


class OperationalStore:
    """File-backed event store under one directory."""

    def __init__(self, root: Path, *, fsync: bool = True):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.journal_path = self.root / "journal.log"
        self._fsync = fsync
        self._lock = threading.RLock()
        self._orders: dict[str, WorkOrder] = {}
        self._next_lsn = 1
        self._recover()
        self._fh = open(self.journal_path, "ab")

    # -- write path ---------------------------------------------------------

    def append(
        self,
        work_order_id: str,
        event: TransitionEvent,
        *,
        created_order: Optional[WorkOrder] = None,
    ) -> int:
        """Durably record one event; returns its log sequence number.

        The event's ``seq`` must be exactly one past the last stored sequence
        for that order (1 for a new order, whose CREATED event must carry the
        full order as ``created_order``); otherwise :class:`SequenceConflict`.
        """
        with self._lock:
            current = self._orders.get(work_order_id)
            if event.kind is EventKind.CREATED:
                if current is not None:
                    raise SequenceConflict(f"{work_order_id} already exists")
                if event.seq != 1:
                    raise SequenceConflict("CREATED must have seq 1")
                if created_order is None:
                    raise StoreError("CREATED events must carry the initial order")
                if created_order.id != work_order_id or len(created_order.history) != 1:
                    raise StoreError("created_order must be the freshly created order")
                record = XmlNode(
                    "log-record",
                    attributes={
                        "lsn": str(self._next_lsn),
                        "order": work_order_id,
                        "recorded": fmt_ts(event.at),
                        "kind": "created",
                    },
                    children=[to_xml(created_order)],
                )
                new_state = created_order.copy()
            else:
                if current is None:
                    raise NotFound(f"no such order {work_order_id!r}")
                expected = current.history[-1].seq + 1
                if event.seq != expected:
                    raise SequenceConflict(
                        f"{work_order_id}: expected seq {expected}, got {event.seq}"
                    )
                record = XmlNode(
                    "log-record",
                    attributes={
                        "lsn": str(self._next_lsn),
                        "order": work_order_id,
                        "recorded": fmt_ts(event.at),
                        "kind": "event",
                    },
                    children=[_event_node(event)],
                )
                new_state = wo_mod.replay_apply(current, event)
            self._write_line(serialize(record))
            lsn = self._next_lsn
            self._next_lsn += 1
            self._orders[work_order_id] = new_state
            return lsn

    def save_new(self, wo: WorkOrder) -> int:
        """Record a freshly created order (sugar for the CREATED append)."""
        return self.append(wo.id, wo.history[0], created_order=wo)

    def record(self, wo: WorkOrder) -> int:
        """Append the newest history event of an already-advanced order."""
        return self.append(wo.id, wo.history[-1])

    def _write_line(self, text: str) -> None:
        self._fh.write(text.encode("ascii") + b"\n")
        self._fh.flush()
        if self._fsync:
            os.fsync(self._fh.fileno())

    # -- read path ------------------------------------------------------

    def load(self, work_order_id: str) -> WorkOrder:
        with self._lock:
            wo = self._orders.get(work_order_id)
            if wo is None:
                raise NotFound(f"no such order {work_order_id!r}")
            return wo.copy()

    def exists(self, work_order_id: str) -> bool:
        with self._lock:
            return work_order_id in self._orders

    def all_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._orders)

    def list_open(self, center: Optional[WorkCenter] = None) -> list[str]:
        """Ids of OPEN orders, optionally only those currently at ``center``."""
        with self._lock:
            out = []
            for wo_id, wo in self._orders.items():
                if wo.status is not OrderStatus.OPEN:
                    continue
                if center is not None and wo.current_center() is not center:
                    continue
                out.append(wo_id)
            return sorted(out)

    def completed_between(self, t_from: float, t_to: float) -> list[str]:
        """Orders whose completion timestamp lies in [t_from, t_to], inclusive."""
        with self._lock:
            out = []
            for wo_id, wo in self._orders.items():
                done = wo.completed_at()
                if done is not None and t_from <= done <= t_to:
                    out.append(wo_id)
            return sorted(out)

    def last_update_at(self, work_order_id: str) -> float:
        with self._lock:
            wo = self._orders.get(work_order_id)
            if wo is None:
                raise NotFound(f"no such order {work_order_id!r}")
            return wo.last_update_at()

    # -- compaction -------------------------------------------------------

    def compact(self, clock: float) -> Path:
        """Fold closed orders into a snapshot file and rewrite the journal.

        Observationally a no-op: every load/list/report answer is unchanged.
        """
        with self._lock:
            snapshot_lsn = self._next_lsn - 1
            closed = {
                wo_id
                for wo_id, wo in self._orders.items()
                if wo.status is not OrderStatus.OPEN
            }
            snap = XmlNode(
                "snapshot",
                attributes={"lsn": str(snapshot_lsn), "at": fmt_ts(clock)},
                children=[to_xml(self._orders[w]) for w in sorted(closed)],
            )
            snap_path = self.root / f"snapshot-{snapshot_lsn}.xml"
            with open(snap_path, "wb") as fh:
                fh.write(serialize(snap).encode("ascii") + b"\n")
                fh.flush()
                os.fsync(fh.fileno())
            # Rewrite the journal without the snapshotted orders' records.
            kept: list[str] = []
            for node in self._journal_records():
                if node.attributes["order"] not in closed:
                    kept.append(serialize(node))
            tmp = self.journal_path.with_suffix(".tmp")
            with open(tmp, "wb") as fh:
                for line in kept:
                    fh.write(line.encode("ascii") + b"\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._fh.close()
            os.replace(tmp, self.journal_path)
            self._fh = open(self.journal_path, "ab")
            return snap_path

    def _journal_records(self) -> list[XmlNode]:
        records = []
        if not self.journal_path.exists():
            return records
        with open(self.journal_path, "rb") as fh:
            for raw in fh:
                if not raw.endswith(b"\n"):
                    break
                try:
                    records.append(parse(raw.rstrip(b"\n")))
                except NotWellFormed:
                    break
        return records

    # -- recovery -----------------------------------------------------------

    def _recover(self) -> None:
        max_lsn = 0
        for snap_path in sorted(
            self.root.glob("snapshot-*.xml"),
            key=lambda p: int(p.stem.split("-")[1]),
        ):
            try:
                snap = parse(snap_path.read_bytes().rstrip(b"\n"))
            except NotWellFormed:
                continue  # half-written snapshot; journal still has the data
            max_lsn = max(max_lsn, int(snap.attributes["lsn"]))
            for order_node in snap.find_all("work-order"):
                wo = from_xml(order_node)
                self._orders[wo.id] = wo
        good_bytes = 0
        damaged = False
        if self.journal_path.exists():
            with open(self.journal_path, "rb") as fh:
                for raw in fh:
                    if not raw.endswith(b"\n"):
                        damaged = True
                        break
                    try:
                        node = parse(raw.rstrip(b"\n"))
                        applied = self._apply_record(node)
                    except (NotWellFormed, StoreError, SchemaViolation,
                            SemanticError, KeyError, ValueError):
                        damaged = True
                        break
                    if applied:
                        good_bytes += len(raw)
                    else:
                        damaged = True
                        break
            if damaged:
                with open(self.journal_path, "r+b") as fh:
                    fh.truncate(good_bytes)
        self._next_lsn = max(max_lsn, self._max_known_lsn()) + 1

    def _max_known_lsn(self) -> int:
        max_lsn = 0
        for node in self._journal_records():
            max_lsn = max(max_lsn, int(node.attributes["lsn"]))
        return max_lsn

    def _apply_record(self, node: XmlNode) -> bool:
        if node.name != "log-record":
            return False
        kind = node.attributes["kind"]
        order_id = node.attributes["order"]
        if kind == "created":
            # The journal wins over any snapshot duplicate (compaction torn
            # between the snapshot write and the journal rewrite).
            self._orders[order_id] = from_xml(node.find("work-order"))
            return True
        if kind == "event":
            current = self._orders.get(order_id)
            if current is None:
                return False
            event = _event_from_node(node.find("event"))
            if event.seq != current.history[-1].seq + 1:
                # Snapshot already includes this event (compaction overlap).
                if event.seq <= current.history[-1].seq:
                    return True
                return False
            self._orders[order_id] = wo_mod.replay_apply(current, event)
            return True
        return False

    def close(self) -> None:
        self._fh.close()
