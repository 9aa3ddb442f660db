"""Publish/subscribe messaging kernel with durable queues and an event router.

The broker removes the three couplings a direct call chain imposes: a
publisher names only a topic, never a receiver (referential); durable
subscriptions accumulate messages while their consumer is away (temporal);
and ``publish`` returns after enqueuing, never running consumer code
(execution).  Delivery is at-least-once: consumers take a message under a
lease and must ack it; expired leases are swept back to the head of the queue
for redelivery, so redelivered messages may jump ahead of global order while
never-redelivered traffic stays FIFO per subscription.

An optional append-only journal (length-prefixed, CRC-checked records) makes
a broker recoverable: on open it replays subscribe/publish/ack/requeue
records, truncating a torn tail write.  The event router forwards matching
messages to other brokers and suppresses duplicates by original message id,
giving exactly-once per (message, remote) under retries.
"""

from __future__ import annotations

import os
import re
import struct
import threading
import zlib
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

TOPIC_SEGMENT = re.compile(r"[a-z0-9_]+\Z")

DEFAULT_LEASE = 30.0


class BusError(Exception):
    pass


class InvalidTopic(BusError):
    pass


class DuplicateSubscriber(BusError):
    pass


class SubscriptionClosed(BusError):
    pass


class UnknownDelivery(BusError):
    pass


class RemoteUnavailable(BusError):
    def __init__(self, remotes: list[str], forwarded: int):
        super().__init__(f"remote broker(s) unavailable: {', '.join(remotes)}")
        self.remotes = remotes
        self.forwarded = forwarded


def validate_topic(name: str) -> None:
    parts = name.split(".")
    if not parts or not all(TOPIC_SEGMENT.match(p) for p in parts):
        raise InvalidTopic(f"bad topic {name!r}")


def validate_pattern(pattern: str) -> None:
    parts = pattern.split(".")
    if not parts:
        raise InvalidTopic(f"bad pattern {pattern!r}")
    for i, part in enumerate(parts):
        if part == "*" and i == len(parts) - 1:
            continue
        if not TOPIC_SEGMENT.match(part):
            raise InvalidTopic(f"bad pattern {pattern!r}")


def topic_matches(pattern: str, topic: str) -> bool:
    """Exact match, or a trailing ``*`` standing for one or more segments."""
    if pattern == topic:
        return True
    if pattern == "*":
        return True
    if pattern.endswith(".*"):
        prefix = pattern[:-1]  # keep the dot
        return topic.startswith(prefix) and len(topic) > len(prefix)
    return False


@dataclass
class Message:
    id: str
    topic: str
    payload: bytes
    published_at: float
    attempts: int = 0
    seq: int = 0  # broker-wide publish order, used to restore FIFO on requeue


@dataclass
class _Delivery:
    message: Message
    deadline: float


class Subscription:
    """Durable per-subscriber queue.  All mutation goes through the broker's
    lock; use the broker (or the convenience methods here) to operate it."""

    def __init__(self, broker: "Broker", subscriber_id: str, pattern: str):
        self.broker = broker
        self.subscriber_id = subscriber_id
        self.pattern = pattern
        self.queue: deque[Message] = deque()
        self.inflight: dict[str, _Delivery] = {}
        self.durable = True
        self.closed = False
        self.delivered_count = 0
        self.acked_count = 0

    @property
    def key(self) -> tuple[str, str]:
        return (self.subscriber_id, self.pattern)

    def consume(self, clock: float, lease: float = DEFAULT_LEASE) -> Optional[Message]:
        return self.broker.consume(self, clock, lease)

    def ack(self, message_id: str) -> None:
        self.broker.ack(self, message_id)

    def __len__(self) -> int:
        return len(self.queue)


# ---------------------------------------------------------------------------
# Journal encoding: u32 body length + u32 crc32(body) + body.
# Body: kind byte, then length-prefixed fields.

_K_PUB = 1
_K_SUB = 2
_K_ACK = 3
_K_REQUEUE = 4


def _enc_field(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def _encode_record(kind: int, fields: Iterable[bytes]) -> bytes:
    body = bytes([kind]) + b"".join(_enc_field(f) for f in fields)
    return struct.pack(">II", len(body), zlib.crc32(body)) + body


class _BodyReader:
    def __init__(self, body: bytes):
        self.body = body
        self.pos = 1

    @property
    def kind(self) -> int:
        return self.body[0]

    def field(self) -> bytes:
        (n,) = struct.unpack_from(">I", self.body, self.pos)
        self.pos += 4
        data = self.body[self.pos : self.pos + n]
        self.pos += n
        return data


class Journal:
    """Append-only record log with torn-tail recovery."""

    def __init__(self, path: Path, *, fsync: bool = True):
        self.path = Path(path)
        self.fsync = fsync
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "ab")

    def append(self, kind: int, fields: Iterable[bytes]) -> None:
        self._fh.write(_encode_record(kind, fields))
        self._fh.flush()
        if self.fsync:
            os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    @staticmethod
    def read_records(path: Path) -> tuple[list[_BodyReader], int]:
        """All intact records plus the byte offset of the first damaged one."""
        records: list[_BodyReader] = []
        try:
            blob = Path(path).read_bytes()
        except FileNotFoundError:
            return records, 0
        pos = 0
        while pos + 8 <= len(blob):
            length, crc = struct.unpack_from(">II", blob, pos)
            body = blob[pos + 8 : pos + 8 + length]
            if len(body) < length or zlib.crc32(body) != crc or length < 1:
                break
            records.append(_BodyReader(body))
            pos += 8 + length
        return records, pos

    @staticmethod
    def truncate_damage(path: Path) -> int:
        """Drop a torn tail in place; returns the number of intact records."""
        records, good = Journal.read_records(path)
        size = Path(path).stat().st_size if Path(path).exists() else 0
        if good < size:
            with open(path, "r+b") as fh:
                fh.truncate(good)
        return len(records)


class Broker:
    """In-process message broker; thread-safe, optionally journal-backed."""

    def __init__(
        self,
        name: str = "broker",
        journal_path: Optional[Path] = None,
        *,
        fsync: bool = True,
    ):
        self.name = name
        self._lock = threading.RLock()
        self._subs: dict[tuple[str, str], Subscription] = {}
        self._next_seq = 1
        self.published_by_topic: dict[str, int] = {}
        self.published_ids: list[str] = []  # audit log, kept even with no subscriber
        self.consumer_executions = 0  # instrumentation: bumped by consumers, never by publish
        self._journal: Optional[Journal] = None
        if journal_path is not None:
            path = Path(journal_path)
            if path.exists():
                Journal.truncate_damage(path)
            self._replay(path)
            self._journal = Journal(path, fsync=fsync)

    # -- core operations ------------------------------------------------

    def publish(self, topic: str, payload: bytes, clock: float) -> str:
        """Enqueue ``payload`` for every matching subscription and return the
        message id.  Runs no consumer code and succeeds with zero subscribers."""
        validate_topic(topic)
        if isinstance(payload, str):
            payload = payload.encode("ascii")
        with self._lock:
            msg_id = f"{self.name}-{self._next_seq:08d}"
            self._record_publish(msg_id, topic, payload, clock)
            if self._journal:
                self._journal.append(
                    _K_PUB,
                    [
                        msg_id.encode(),
                        topic.encode(),
                        struct.pack(">d", clock),
                        payload,
                    ],
                )
            return msg_id

    def _record_publish(self, msg_id: str, topic: str, payload: bytes, clock: float) -> None:
        seq = self._next_seq
        self._next_seq += 1
        self.published_by_topic[topic] = self.published_by_topic.get(topic, 0) + 1
        self.published_ids.append(msg_id)
        for sub in self._subs.values():
            if not sub.closed and topic_matches(sub.pattern, topic):
                sub.queue.append(
                    Message(id=msg_id, topic=topic, payload=payload,
                            published_at=clock, seq=seq)
                )

    def subscribe(self, subscriber_id: str, pattern: str) -> Subscription:
        validate_pattern(pattern)
        with self._lock:
            key = (subscriber_id, pattern)
            if key in self._subs:
                raise DuplicateSubscriber(
                    f"{subscriber_id!r} already subscribed to {pattern!r}"
                )
            sub = Subscription(self, subscriber_id, pattern)
            self._subs[key] = sub
            if self._journal:
                self._journal.append(_K_SUB, [subscriber_id.encode(), pattern.encode()])
            return sub

    def subscription(self, subscriber_id: str, pattern: str) -> Optional[Subscription]:
        return self._subs.get((subscriber_id, pattern))

    def consume(self, sub: Subscription, clock: float,
                lease: float = DEFAULT_LEASE) -> Optional[Message]:
        """Move the queue head into the in-flight set until ``clock + lease``.
        Non-blocking: an empty queue yields ``None``."""
        with self._lock:
            if sub.closed:
                raise SubscriptionClosed(f"{sub.key} is closed")
            if not sub.queue:
                return None
            msg = sub.queue.popleft()
            sub.inflight[msg.id] = _Delivery(message=msg, deadline=clock + lease)
            sub.delivered_count += 1
            return msg

    def ack(self, sub: Subscription, message_id: str) -> None:
        with self._lock:
            if message_id not in sub.inflight:
                raise UnknownDelivery(f"message {message_id!r} is not in flight")
            del sub.inflight[message_id]
            sub.acked_count += 1
            if self._journal:
                self._journal.append(
                    _K_ACK,
                    [sub.subscriber_id.encode(), sub.pattern.encode(),
                     message_id.encode()],
                )

    def nack(self, sub: Subscription, message_id: str) -> None:
        """Return an in-flight message to the queue head immediately."""
        with self._lock:
            if message_id not in sub.inflight:
                raise UnknownDelivery(f"message {message_id!r} is not in flight")
            delivery = sub.inflight.pop(message_id)
            delivery.message.attempts += 1
            self._requeue_front(sub, [delivery.message])
            if self._journal:
                self._journal.append(
                    _K_REQUEUE,
                    [sub.subscriber_id.encode(), sub.pattern.encode(),
                     message_id.encode()],
                )

    def sweep_redelivery(self, clock: float) -> int:
        """Requeue every lease-expired in-flight message, oldest first."""
        requeued = 0
        with self._lock:
            for sub in self._subs.values():
                expired = [d for d in sub.inflight.values() if d.deadline <= clock]
                if not expired:
                    continue
                expired.sort(key=lambda d: d.message.seq)
                for delivery in expired:
                    del sub.inflight[delivery.message.id]
                    delivery.message.attempts += 1
                    if self._journal:
                        self._journal.append(
                            _K_REQUEUE,
                            [sub.subscriber_id.encode(), sub.pattern.encode(),
                             delivery.message.id.encode()],
                        )
                self._requeue_front(sub, [d.message for d in expired])
                requeued += len(expired)
        return requeued

    @staticmethod
    def _requeue_front(sub: Subscription, messages: list[Message]) -> None:
        # Head region: requeued messages precede undelivered ones but keep
        # their original publish order among themselves.
        for msg in reversed(messages):
            sub.queue.appendleft(msg)

    # -- audit ------------------------------------------------------------

    def audit(self) -> dict:
        with self._lock:
            return {
                "published": dict(sorted(self.published_by_topic.items())),
                "published_total": len(self.published_ids),
                "subscriptions": {
                    f"{sid}|{pattern}": {
                        "queued": len(sub.queue),
                        "inflight": len(sub.inflight),
                        "delivered": sub.delivered_count,
                        "acked": sub.acked_count,
                    }
                    for (sid, pattern), sub in sorted(self._subs.items())
                },
            }

    # -- recovery ---------------------------------------------------------

    def _replay(self, path: Path) -> None:
        records, _ = Journal.read_records(path)
        for rec in records:
            kind = rec.kind
            if kind == _K_SUB:
                sid = rec.field().decode()
                pattern = rec.field().decode()
                self._subs[(sid, pattern)] = Subscription(self, sid, pattern)
            elif kind == _K_PUB:
                msg_id = rec.field().decode()
                topic = rec.field().decode()
                (clock,) = struct.unpack(">d", rec.field())
                payload = rec.field()
                self._record_publish(msg_id, topic, payload, clock)
            elif kind == _K_ACK:
                sid = rec.field().decode()
                pattern = rec.field().decode()
                msg_id = rec.field().decode()
                sub = self._subs.get((sid, pattern))
                if sub is not None:
                    # Replay never consumes, so the message sits in the queue.
                    for i, msg in enumerate(sub.queue):
                        if msg.id == msg_id:
                            del sub.queue[i]
                            sub.acked_count += 1
                            break
            elif kind == _K_REQUEUE:
                sid = rec.field().decode()
                pattern = rec.field().decode()
                msg_id = rec.field().decode()
                sub = self._subs.get((sid, pattern))
                if sub is not None:
                    for msg in sub.queue:
                        if msg.id == msg_id:
                            msg.attempts += 1
                            break

    def close(self) -> None:
        if self._journal:
            self._journal.close()
            self._journal = None


# ---------------------------------------------------------------------------
# Event router


@dataclass
class RouterTable:
    """Forwarding rules plus the dedup window of already-forwarded ids."""

    routes: list[tuple[str, str]]  # (pattern, remote center name)
    seen: set[tuple[str, str]] = field(default_factory=set)  # (message id, remote)


class EventRouter:
    """Pumps matching messages from a source broker to remote brokers.

    The router holds its own durable subscriptions on the source, so messages
    survive remote outages; forwarding is retried until acked and duplicates
    are suppressed per (message, remote).
    """

    def __init__(self, source: Broker, table: RouterTable,
                 subscriber_id: str = "event-router"):
        self.source = source
        self.table = table
        self.subs: dict[int, Subscription] = {}
        for i, (pattern, _remote) in enumerate(table.routes):
            existing = source.subscription(f"{subscriber_id}-{i}", pattern)
            self.subs[i] = existing or source.subscribe(f"{subscriber_id}-{i}", pattern)

    def pump(self, targets: dict[str, Broker], clock: float,
             *, lease: float = DEFAULT_LEASE) -> int:
        """Forward every queued matching message; returns the count forwarded.

        Routes whose remote is missing keep their backlog and the call raises
        :class:`RemoteUnavailable` after the healthy routes are pumped.
        """
        forwarded = 0
        unavailable: list[str] = []
        for i, (pattern, remote) in enumerate(self.table.routes):
            sub = self.subs[i]
            target = targets.get(remote)
            if target is None:
                if sub.queue:
                    unavailable.append(remote)
                continue
            while True:
                msg = self.source.consume(sub, clock, lease)
                if msg is None:
                    break
                key = (msg.id, remote)
                if key not in self.table.seen:
                    target.publish(msg.topic, msg.payload, clock)
                    self.table.seen.add(key)
                    forwarded += 1
                self.source.ack(sub, msg.id)
        if unavailable:
            raise RemoteUnavailable(unavailable, forwarded)
        return forwarded
