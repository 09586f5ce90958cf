"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library's closed-form paths: they
integrate or sample the pointwise rule itself, so agreement is evidence and
not tautology.
"""

from __future__ import annotations

import math

import numpy as np
from hypothesis import settings
from hypothesis import strategies as st

import bdsched as bd

settings.register_profile("suite", max_examples=120, deadline=None)
settings.load_profile("suite")


def numeric_buffer(pairs) -> bd.BufferState:
    """Buffer from (weight, deadline) or (weight, deadline, id) tuples."""
    packets = []
    for i, item in enumerate(pairs):
        w, d, *rest = item
        packets.append(bd.Packet(rest[0] if rest else i, w, bd.DeadlineKey.numeric(d)))
    return bd.BufferState.from_packets(packets)


def ordinal_twin(buffer: bd.BufferState) -> bd.BufferState:
    """Same weights in the same deadline order, deadlines replaced by ranks."""
    return bd.BufferState.from_packets(
        bd.Packet(p.id, p.weight, bd.DeadlineKey.ordinal(rank))
        for rank, p in enumerate(buffer.packets)
    )


def rule_breakpoints(buffer: bd.BufferState) -> list[float]:
    """x values where the pointwise rule can switch picks (no atom enumeration)."""
    w_h = max(p.weight for p in buffer.packets)
    pts = {-1.0, 0.0}
    for p in buffer.packets:
        x = math.log(p.weight / w_h)
        if -1.0 < x < 0.0:
            pts.add(x)
    return sorted(pts)


def quad_gain(buffer: bd.BufferState) -> float:
    """Adaptive numeric integration of the pointwise pick weight over [-1, 0]."""
    from scipy.integrate import quad

    val, _ = quad(
        lambda x: bd.rmix_choose(buffer, x).packet.weight,
        -1.0,
        0.0,
        points=rule_breakpoints(buffer),
        limit=200,
    )
    return val


def quad_adv_credit(buffer: bd.BufferState, j_id: int) -> float:
    """Numeric integration of the adversary's amortized credit for choice j.

    The pick f contributes extra credit exactly when j is strictly earlier.
    """
    from scipy.integrate import quad

    j = buffer.get(j_id)

    def credit(x: float) -> float:
        f = bd.rmix_choose(buffer, x).packet
        return j.weight + (f.weight if j.sort_key < f.sort_key else 0.0)

    val, _ = quad(credit, -1.0, 0.0, points=rule_breakpoints(buffer), limit=200)
    return val


def mc_gain(buffer: bd.BufferState, n: int, seed: int) -> tuple[float, float]:
    """Monte Carlo mean and sample std of the pick weight over n draws.

    Vectorizes the rule directly: the earliest pending packet with weight at
    least the threshold is the first index where the running max reaches it.
    Mean and std come from per-packet pick counts, so degenerate buffers
    (every draw picks the same packet) carry no float-summation noise.
    """
    w = np.array([p.weight for p in buffer.packets])
    running = np.maximum.accumulate(w)
    xs = np.random.Generator(np.random.PCG64(seed)).uniform(-1.0, 0.0, size=n)
    picks = np.searchsorted(running, np.exp(xs) * w.max(), side="left")
    counts = np.bincount(picks, minlength=len(w))
    if np.count_nonzero(counts) == 1:
        return float(w[counts.argmax()]), 0.0
    mean = math.fsum(c * x for c, x in zip(counts, w)) / n
    var = math.fsum(c * (x - mean) ** 2 for c, x in zip(counts, w)) / (n - 1)
    return mean, math.sqrt(var)


def brute_frontier(buffer: bd.BufferState) -> list[bd.Packet]:
    """All-pairs evaluation of the frontier definition."""
    out = []
    for j in buffer.packets:
        if not any(
            k.weight > j.weight and k.sort_key < j.sort_key for k in buffer.packets
        ):
            out.append(j)
    return sorted(out, key=lambda p: p.sort_key)


def random_instance(
    rng: np.random.Generator, max_packets: int = 8, max_steps: int = 8
) -> bd.Trace:
    """Small numeric trace with random windows, for offline cross-checks."""
    n = int(rng.integers(0, max_packets + 1))
    by_step: dict[int, list[bd.Packet]] = {}
    for pid in range(n):
        arr = int(rng.integers(0, max_steps))
        due = int(rng.integers(arr, max_steps))
        w = float(np.exp(rng.uniform(math.log(1e-3), 0.0)))
        by_step.setdefault(arr, []).append(
            bd.Packet(pid, w, bd.DeadlineKey.numeric(due), arr)
        )
    events = tuple(
        bd.StepEvent(step, tuple(ps)) for step, ps in sorted(by_step.items())
    )
    return bd.Trace(bd.NUMERIC, events)


def buffer_entries(max_size: int = 10):
    weights = st.floats(min_value=1e-3, max_value=1.0, allow_nan=False)
    return st.lists(
        st.tuples(weights, st.integers(min_value=0, max_value=12)),
        min_size=1,
        max_size=max_size,
    )


def buffers(max_size: int = 10):
    """Hypothesis strategy for small numeric buffers."""
    return buffer_entries(max_size).map(numeric_buffer)
