"""Packets, deadline order, buffer state, and the per-step lifecycle.

A step proceeds as: arrivals, then transmissions (one packet per player),
then expirations.  A numeric deadline d therefore means "transmittable at
every step <= d".  Ordinal instances carry no numeric deadlines: packets
only have an expiration rank, and each step may expire any prefix of the
rank-ordered pending packets.

All types here have value semantics; operations return new objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import HarnessError, ModelError, TraceError

NUMERIC = "numeric"
ORDINAL = "ordinal"


@dataclass(frozen=True)
class DeadlineKey:
    """Deadline of a packet: a time step (numeric) or an expiration rank (ordinal)."""

    kind: str
    value: int

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, ORDINAL):
            raise ModelError(f"unknown deadline kind {self.kind!r}")
        if self.value < 0:
            raise ModelError(f"deadline value must be non-negative, got {self.value}")

    @classmethod
    def numeric(cls, step: int) -> DeadlineKey:
        return cls(NUMERIC, step)

    @classmethod
    def ordinal(cls, rank: int) -> DeadlineKey:
        return cls(ORDINAL, rank)


@dataclass(frozen=True)
class Packet:
    """A unit job with a positive weight and a deadline key.

    Ids are unique within an instance and assigned in arrival order; they
    double as the tie-break that makes the deadline order total.
    """

    id: int
    weight: float
    deadline: DeadlineKey
    arrival: int = 0

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ModelError(f"packet id must be non-negative, got {self.id}")
        if not self.weight > 0:
            raise ModelError(f"packet weight must be positive, got {self.weight}")
        if self.arrival < 0:
            raise ModelError(f"arrival step must be non-negative, got {self.arrival}")
        if self.deadline.kind == NUMERIC and self.deadline.value < self.arrival:
            # a packet must be transmittable in at least its arrival step
            raise ModelError(
                f"packet {self.id}: deadline {self.deadline.value} precedes "
                f"arrival step {self.arrival}"
            )

    @property
    def sort_key(self) -> tuple[int, int]:
        """Key inducing the strict total deadline order (deadline, then id)."""
        return (self.deadline.value, self.id)


def deadline_before(a: Packet, b: Packet) -> bool:
    """Strict earlier-deadline order; deadline ties broken by ascending id."""
    if a.deadline.kind != b.deadline.kind:
        raise ModelError("cannot compare numeric and ordinal deadlines")
    return a.sort_key < b.sort_key


def deadline_before_eq(a: Packet, b: Packet) -> bool:
    """Non-strict deadline order: ``deadline_before(a, b)`` or ``a == b``."""
    if a.deadline.kind != b.deadline.kind:
        raise ModelError("cannot compare numeric and ordinal deadlines")
    return a.sort_key <= b.sort_key


@dataclass(frozen=True)
class BufferState:
    """The set of pending packets, kept sorted in deadline order."""

    kind: str
    packets: tuple[Packet, ...]

    @classmethod
    def empty(cls, kind: str = NUMERIC) -> BufferState:
        if kind not in (NUMERIC, ORDINAL):
            raise ModelError(f"unknown deadline kind {kind!r}")
        return cls(kind, ())

    @classmethod
    def from_packets(cls, packets: Iterable[Packet], kind: str | None = None) -> BufferState:
        items = sorted(packets, key=lambda p: p.sort_key)
        if kind is None:
            if not items:
                raise ModelError("cannot infer deadline kind of an empty buffer")
            kind = items[0].deadline.kind
        seen: set[int] = set()
        for p in items:
            if p.deadline.kind != kind:
                raise ModelError(f"packet {p.id}: deadline kind mismatch in buffer")
            if p.id in seen:
                raise ModelError(f"duplicate packet id {p.id}")
            seen.add(p.id)
        return cls(kind, tuple(items))

    def __len__(self) -> int:
        return len(self.packets)

    def __iter__(self) -> Iterator[Packet]:
        return iter(self.packets)

    def __contains__(self, packet_id: int) -> bool:
        return any(p.id == packet_id for p in self.packets)

    def get(self, packet_id: int) -> Packet | None:
        for p in self.packets:
            if p.id == packet_id:
                return p
        return None

    def add(self, arrivals: Iterable[Packet]) -> BufferState:
        """Insert arriving packets, preserving the deadline order."""
        arrivals = tuple(arrivals)
        if not arrivals:
            return self
        return BufferState.from_packets(self.packets + arrivals, self.kind)

    def remove(self, packet_ids: Iterable[int]) -> BufferState:
        """Remove transmitted packets; removing an absent id is a harness error."""
        ids = set(packet_ids)
        if not ids:
            return self
        kept = tuple(p for p in self.packets if p.id not in ids)
        if len(kept) != len(self.packets) - len(ids):
            pending = {p.id for p in self.packets}
            raise HarnessError(f"cannot transmit non-pending packets {sorted(ids - pending)}")
        return BufferState(self.kind, kept)

    def expire_due(self, step: int) -> BufferState:
        """Numeric expiry: drop every packet whose deadline is <= the given step."""
        if self.kind != NUMERIC:
            raise ModelError("expire_due applies to numeric buffers only")
        kept = tuple(p for p in self.packets if p.deadline.value > step)
        return self if len(kept) == len(self.packets) else BufferState(self.kind, kept)

    def expire_first(self, count: int) -> BufferState:
        """Ordinal expiry: drop the earliest-deadline ``count`` pending packets."""
        if self.kind != ORDINAL:
            raise ModelError("expire_first applies to ordinal buffers only")
        if count < 0 or count > len(self.packets):
            raise TraceError(
                f"expire_prefix {count} exceeds buffer size {len(self.packets)}"
            )
        return self if count == 0 else BufferState(self.kind, self.packets[count:])


def heaviest(buffer: BufferState) -> Packet | None:
    """The maximum-weight pending packet; weight ties go to the deadline-earliest.

    Returns None on an empty buffer.
    """
    best: Packet | None = None
    for p in buffer.packets:  # deadline order, so strict > keeps the earliest
        if best is None or p.weight > best.weight:
            best = p
    return best


def pareto_frontier(buffer: BufferState) -> list[Packet]:
    """Packets j with no pending k both strictly heavier and strictly earlier.

    These are exactly the adversary choices satisfying the greediness
    property: every other pending packet is no heavier or no earlier.
    Sorted by deadline order.
    """
    frontier: list[Packet] = []
    prefix_max = 0.0
    for p in buffer.packets:
        if p.weight >= prefix_max:
            frontier.append(p)
            prefix_max = p.weight
    return frontier


@dataclass(frozen=True)
class StepEvent:
    """Arrivals of one step, plus the expiring prefix length in ordinal traces."""

    step: int
    arrivals: tuple[Packet, ...] = ()
    expire_prefix: int | None = None

    def __post_init__(self) -> None:
        if self.step < 0:
            raise TraceError(f"event step must be non-negative, got {self.step}")
        if self.expire_prefix is not None and self.expire_prefix < 0:
            raise TraceError(f"expire_prefix must be non-negative, got {self.expire_prefix}")


@dataclass(frozen=True)
class Trace:
    """A replayable instance: per-step arrivals and (ordinal) expiration events."""

    kind: str
    events: tuple[StepEvent, ...]

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, ORDINAL):
            raise ModelError(f"unknown trace kind {self.kind!r}")
        last_step = -1
        seen: set[int] = set()
        for ev in self.events:
            if ev.step <= last_step:
                raise TraceError(f"event steps must be strictly increasing at step {ev.step}")
            last_step = ev.step
            if ev.expire_prefix is not None and self.kind != ORDINAL:
                raise TraceError("expire_prefix events are only valid in ordinal traces")
            for p in ev.arrivals:
                if p.deadline.kind != self.kind:
                    raise TraceError(f"packet {p.id}: deadline kind mismatch in trace")
                if p.arrival != ev.step:
                    raise TraceError(
                        f"packet {p.id}: arrival step {p.arrival} differs from event step {ev.step}"
                    )
                if p.id in seen:
                    raise TraceError(f"duplicate packet id {p.id} in trace")
                seen.add(p.id)

    def packets(self) -> list[Packet]:
        return [p for ev in self.events for p in ev.arrivals]

    @property
    def horizon(self) -> int:
        """Last step worth simulating: max deadline (numeric) or last event step."""
        if not self.events:
            return 0
        last = self.events[-1].step
        if self.kind == ORDINAL:
            return last
        deadlines = [p.deadline.value for p in self.packets()]
        return max(deadlines, default=last)


def apply_step(
    buffer: BufferState, event: StepEvent, transmitted: Iterable[int] = ()
) -> BufferState:
    """Run one full step: insert arrivals, remove transmitted ids, expire.

    Numeric buffers expire everything due at the event step; ordinal buffers
    expire the event's prefix length (if any).
    """
    buf = buffer.add(event.arrivals).remove(transmitted)
    if buf.kind == NUMERIC:
        return buf.expire_due(event.step)
    if event.expire_prefix is not None:
        return buf.expire_first(event.expire_prefix)
    return buf
