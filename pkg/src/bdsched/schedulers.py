"""Per-step scheduling rules: RMix and deterministic baselines.

RMix draws x uniformly from [-1, 0] and transmits the earliest-deadline
pending packet whose weight is at least e^x times the heaviest pending
weight.  Because the chosen packet is piecewise constant in x, the rule
also has an exact finite description: `rmix_distribution` enumerates the
selectable packets with their probabilities and x-intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import HarnessError, ModelError
from .model import BufferState, Packet, heaviest


@dataclass(frozen=True)
class SchedulerDecision:
    """Outcome of one scheduling step; ``x`` is recorded for randomized rules."""

    packet: Packet | None
    x: float | None = None

    @property
    def chosen(self) -> int | None:
        return None if self.packet is None else self.packet.id


@dataclass(frozen=True)
class Atom:
    """One probability atom: RMix picks ``packet`` exactly when x is in (lo, hi]."""

    packet: Packet
    probability: float
    lo: float
    hi: float


@dataclass(frozen=True)
class SelectionDistribution:
    """RMix's exact selection probabilities for one buffer.

    Atoms are ordered by increasing x (equivalently increasing weight); their
    intervals tile [-1, 0] and their probabilities sum to one.
    """

    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        total = math.fsum(a.probability for a in self.atoms)
        if abs(total - 1.0) > 1e-9:
            raise ModelError(f"selection probabilities sum to {total}, not 1")
        lo = -1.0
        for a in self.atoms:
            if not (a.lo == lo and a.hi > a.lo and a.hi <= 0.0):
                raise ModelError("selection intervals must tile [-1, 0] in order")
            lo = a.hi

    def expected_weight(self) -> float:
        return math.fsum(a.probability * a.packet.weight for a in self.atoms)

    def weight_variance(self) -> float:
        mean = self.expected_weight()
        second = math.fsum(a.probability * a.packet.weight**2 for a in self.atoms)
        return max(second - mean * mean, 0.0)


def rmix_choose(buffer: BufferState, x: float) -> SchedulerDecision:
    """Deterministic part of RMix: the pick for a given draw x in [-1, 0]."""
    if not -1.0 <= x <= 0.0:
        raise HarnessError(f"x must lie in [-1, 0], got {x}")
    if not buffer:
        return SchedulerDecision(None, x)
    h = heaviest(buffer)
    threshold = math.exp(x) * h.weight
    for p in buffer.packets:  # deadline order; h itself always qualifies
        if p.weight >= threshold:
            return SchedulerDecision(p, x)
    raise AssertionError("unreachable: the heaviest packet satisfies the threshold")


def rmix_sample(
    buffer: BufferState, rng: np.random.Generator
) -> SchedulerDecision:
    """Draw x uniformly from [-1, 0] and apply the rule.

    An empty buffer consumes no randomness, which keeps replays aligned
    with recorded traces.
    """
    if not buffer:
        return SchedulerDecision(None, None)
    x = float(rng.uniform(-1.0, 0.0))
    return rmix_choose(buffer, x)


def rmix_distribution(buffer: BufferState) -> SelectionDistribution:
    """Exact probability atoms of the RMix pick for one buffer.

    Only packets strictly heavier than every earlier-deadline pending packet
    are selectable; such a packet p is picked when e^x * w_h falls in
    (prefix_max, w_p], i.e. for x in (log(prefix_max/w_h), log(w_p/w_h)],
    clamped to [-1, 0].  Packets lighter than w_h / e get no atom.
    """
    if not buffer:
        raise ModelError("empty buffer has no selection distribution")
    w_h = heaviest(buffer).weight
    atoms = []
    prefix_max = 0.0
    lo = -1.0  # upper end of the previous kept atom, exact chaining
    for p in buffer.packets:
        if p.weight <= prefix_max:
            continue
        prefix_max = p.weight
        hi = math.log(p.weight / w_h)  # exactly 0.0 for the earliest heaviest
        if hi <= lo:
            continue
        atoms.append(Atom(p, hi - lo, lo, hi))
        lo = hi
    return SelectionDistribution(tuple(atoms))


def greedy_choose(buffer: BufferState) -> SchedulerDecision:
    """Transmit the heaviest pending packet (ties to the deadline-earliest)."""
    return SchedulerDecision(heaviest(buffer))


def edf_choose(buffer: BufferState) -> SchedulerDecision:
    """Transmit the earliest-deadline pending packet."""
    return SchedulerDecision(buffer.packets[0] if buffer else None)


SchedulerFn = Callable[[BufferState, np.random.Generator], SchedulerDecision]

SCHEDULERS: dict[str, SchedulerFn] = {
    "rmix": rmix_sample,
    "greedy": lambda buffer, rng: greedy_choose(buffer),
    "edf": lambda buffer, rng: edf_choose(buffer),
}


def get_scheduler(name: str) -> SchedulerFn:
    try:
        return SCHEDULERS[name]
    except KeyError:
        raise ModelError(
            f"unknown scheduler {name!r}; expected one of {sorted(SCHEDULERS)}"
        ) from None
