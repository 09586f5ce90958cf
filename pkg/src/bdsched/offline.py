"""Exact offline optimum for realized (numeric) instances.

Feasible packet sets form a transversal matroid (packets matchable into the
time slots of their [arrival, deadline] windows), so greedy by weight with
an incremental augmenting-path feasibility check is exactly optimal.
`opt_brute` is the independent oracle: exhaustive subset search with an
earliest-deadline feasibility sweep, for small instances only.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .errors import ConfigError, ModelError, TraceError
from .model import (
    NUMERIC,
    ORDINAL,
    BufferState,
    DeadlineKey,
    Packet,
    StepEvent,
    Trace,
)

BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class Schedule:
    """One packet per step, each within its [arrival, deadline] window."""

    assignments: tuple[tuple[int, int], ...]  # (step, packet id), step-ascending
    value: float

    def to_rows(self, trace: Trace) -> list[dict]:
        weights = {p.id: p.weight for p in trace.packets()}
        return [
            {"step": step, "packet": pid, "weight": weights[pid]}
            for step, pid in self.assignments
        ]


def _greedy_order(packets: list[Packet]) -> list[Packet]:
    return sorted(packets, key=lambda p: (-p.weight, p.deadline.value, p.id))


def opt_greedy(trace: Trace) -> Schedule:
    """Maximum-weight feasible schedule via matroid greedy.

    Packets are considered in descending weight (ties: earlier deadline,
    then id); each is kept iff the kept set stays matchable into time
    slots, checked by augmenting paths over the slot assignment.
    """
    if trace.kind != NUMERIC:
        raise ModelError("ordinal instances must be realized first (realize_deadlines)")
    slot_owner: dict[int, Packet] = {}

    def augment(p: Packet, visited: set[int]) -> bool:
        for t in range(p.arrival, p.deadline.value + 1):
            if t in visited:
                continue
            visited.add(t)
            q = slot_owner.get(t)
            if q is None or augment(q, visited):
                slot_owner[t] = p
                return True
        return False

    for p in _greedy_order(trace.packets()):
        augment(p, set())

    assignments = tuple(sorted((t, p.id) for t, p in slot_owner.items()))
    return Schedule(assignments, math.fsum(p.weight for p in slot_owner.values()))


def _edf_assign(packets: list[Packet]) -> list[tuple[int, int]] | None:
    """Schedule the whole set earliest-deadline-first, or None if infeasible.

    For unit jobs with arrival windows, EDF schedules a set iff it is
    feasible at all, which is what makes this an independent oracle check.
    """
    if not packets:
        return []
    by_arrival = sorted(packets, key=lambda p: (p.arrival, p.sort_key))
    out: list[tuple[int, int]] = []
    ready: list[tuple[int, int]] = []  # heap of (deadline, id)
    i = 0
    t = by_arrival[0].arrival
    while i < len(by_arrival) or ready:
        while i < len(by_arrival) and by_arrival[i].arrival <= t:
            heapq.heappush(ready, by_arrival[i].sort_key)
            i += 1
        if not ready:
            t = by_arrival[i].arrival
            continue
        deadline, pid = heapq.heappop(ready)
        if deadline < t:
            return None  # a committed packet expired unscheduled
        out.append((t, pid))
        t += 1
    return out


def opt_brute(trace: Trace) -> Schedule:
    """Exhaustive optimum over packet subsets; refuses instances over the size guard."""
    if trace.kind != NUMERIC:
        raise ModelError("ordinal instances must be realized first (realize_deadlines)")
    packets = trace.packets()
    if len(packets) > BRUTE_FORCE_LIMIT:
        raise ConfigError(
            f"brute-force oracle refuses {len(packets)} packets (limit {BRUTE_FORCE_LIMIT})"
        )
    best_value = 0.0
    best: list[tuple[int, int]] = []
    for mask in range(1 << len(packets)):
        subset = [p for k, p in enumerate(packets) if mask >> k & 1]
        value = math.fsum(p.weight for p in subset)
        if value <= best_value:
            continue
        assigned = _edf_assign(subset)
        if assigned is not None:
            best_value = value
            best = assigned
    return Schedule(tuple(sorted(best)), best_value)


def realize_deadlines(trace: Trace) -> Trace:
    """Convert an ordinal trace into a numeric instance.

    Expiration events are replayed on the transmission-free buffer: a packet
    removed by the expiring prefix of step t gets numeric deadline t (it was
    still transmittable in that step, since expiry follows transmission);
    packets never expired get the final event step.
    """
    if trace.kind != ORDINAL:
        raise ModelError("realize_deadlines expects an ordinal trace")
    if not trace.events:
        return Trace(NUMERIC, ())
    horizon = trace.events[-1].step
    deadline_of: dict[int, int] = {}
    buf = BufferState.empty(ORDINAL)
    for ev in trace.events:
        buf = buf.add(ev.arrivals)
        if ev.expire_prefix:
            if ev.expire_prefix > len(buf):
                raise TraceError(
                    f"step {ev.step}: expire_prefix {ev.expire_prefix} exceeds "
                    f"the {len(buf)} packets arrived and not yet expired"
                )
            for p in buf.packets[: ev.expire_prefix]:
                deadline_of[p.id] = ev.step
            buf = buf.expire_first(ev.expire_prefix)

    events = []
    for ev in trace.events:
        arrivals = tuple(
            Packet(
                id=p.id,
                weight=p.weight,
                deadline=DeadlineKey.numeric(deadline_of.get(p.id, horizon)),
                arrival=ev.step,
            )
            for p in ev.arrivals
        )
        if arrivals:
            events.append(StepEvent(step=ev.step, arrivals=arrivals))
    return Trace(NUMERIC, tuple(events))
