"""Oblivious (fixed-trace) simulation runs and competitive-ratio reports.

Trial i draws its randomness from PCG64(seed + i), so chunked or parallel
execution reproduces the serial results bit for bit.  The RMix trials are
run through a vectorized engine that is exactly stream- and
arithmetic-equivalent to stepping `rmix_sample` packet by packet.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ModelError, TraceError
from .model import NUMERIC, ORDINAL, BufferState, Trace
from .offline import opt_greedy, realize_deadlines
from .schedulers import SCHEDULERS, get_scheduler

Z_95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class RunReport:
    """Per-trial gains and ratios of one scheduler against the offline optimum."""

    scheduler: str
    seed: int
    trials: int
    opt_value: float
    gains: tuple[float, ...]
    ratios: tuple[float, ...]
    mean_ratio: float
    ci_half_width: float
    bound: float = 1.0 - 1.0 / math.e

    def to_dict(self) -> dict:
        return {
            "scheduler": self.scheduler,
            "seed": self.seed,
            "trials": self.trials,
            "opt_value": self.opt_value,
            "mean_ratio": self.mean_ratio,
            "ci_half_width": self.ci_half_width,
            "bound": self.bound,
            "bound_reciprocal": 1.0 / self.bound,
            "per_trial": [
                {"trial": i, "gain": g, "opt_value": self.opt_value, "ratio": r}
                for i, (g, r) in enumerate(zip(self.gains, self.ratios))
            ],
        }


def simulate_trial(trace: Trace, scheduler: str, rng: np.random.Generator) -> float:
    """Reference serial run of one trial; returns the realized gain."""
    play = get_scheduler(scheduler)
    events = {ev.step: ev for ev in trace.events}
    first = trace.events[0].step if trace.events else 0
    buffer = BufferState.empty(trace.kind)
    gain = 0.0
    for step in range(first, trace.horizon + 1):
        ev = events.get(step)
        if ev is not None:
            buffer = buffer.add(ev.arrivals)
        decision = play(buffer, rng)
        if decision.packet is not None:
            gain += decision.packet.weight
            buffer = buffer.remove((decision.packet.id,))
        if trace.kind == NUMERIC:
            buffer = buffer.expire_due(step)
        elif ev is not None and ev.expire_prefix is not None:
            buffer = buffer.expire_first(ev.expire_prefix)
    return gain


def _instance_arrays(trace: Trace):
    """Packets in deadline order plus per-step arrival/expiry lookups."""
    packets = sorted(trace.packets(), key=lambda p: p.sort_key)
    weights = np.array([p.weight for p in packets], dtype=float)
    col_of = {p.id: k for k, p in enumerate(packets)}
    arrivals: dict[int, np.ndarray] = {}
    prefixes: dict[int, int] = {}
    for ev in trace.events:
        if ev.arrivals:
            arrivals[ev.step] = np.array([col_of[p.id] for p in ev.arrivals], dtype=int)
        if ev.expire_prefix:
            prefixes[ev.step] = ev.expire_prefix
    due = np.array([p.deadline.value for p in packets], dtype=int)
    return weights, due, arrivals, prefixes


def _rmix_gains_chunk(trace: Trace, seed: int, start: int, count: int) -> np.ndarray:
    """Vectorized RMix gains for trials start .. start+count-1.

    Per trial the x draws are pre-generated from PCG64(seed + trial) and
    consumed only on steps with a non-empty buffer, matching the serial
    `rmix_sample` semantics (an empty buffer consumes no randomness).
    """
    first = trace.events[0].step if trace.events else 0
    n_steps = trace.horizon - first + 1
    weights, due, arrivals, prefixes = _instance_arrays(trace)
    n_packets = len(weights)
    gains = np.zeros(count)
    if n_packets == 0 or n_steps <= 0:
        return gains

    xs = np.empty((count, n_steps))
    for i in range(count):
        rng = np.random.Generator(np.random.PCG64(seed + start + i))
        xs[i] = rng.uniform(-1.0, 0.0, size=n_steps)
    cursor = np.zeros(count, dtype=int)
    pending = np.zeros((count, n_packets), dtype=bool)
    rows = np.arange(count)

    for step in range(first, trace.horizon + 1):
        cols = arrivals.get(step)
        if cols is not None:
            pending[:, cols] = True
        masked = np.where(pending, weights, 0.0)
        h = masked.max(axis=1)
        active = h > 0.0
        if active.any():
            act_rows = rows[active]
            x = xs[act_rows, cursor[act_rows]]
            cursor[act_rows] += 1
            thresholds = np.exp(x) * h[active]
            running = np.maximum.accumulate(masked[active], axis=1)
            picked = (running >= thresholds[:, None]).argmax(axis=1)
            gains[act_rows] += weights[picked]
            pending[act_rows, picked] = False
        if trace.kind == NUMERIC:
            pending[:, due <= step] = False
        elif step in prefixes:
            k = prefixes[step]
            counts = np.cumsum(pending, axis=1)
            if (counts[:, -1] < k).any():
                raise TraceError(f"step {step}: expire_prefix {k} exceeds a trial's buffer")
            pending &= counts > k
    return gains


def _gains_for_range(args) -> np.ndarray:
    trace, scheduler, seed, start, count = args
    if scheduler == "rmix":
        return _rmix_gains_chunk(trace, seed, start, count)
    # deterministic baselines: every trial is the same run
    rng = np.random.Generator(np.random.PCG64(seed + start))
    return np.full(count, simulate_trial(trace, scheduler, rng))


def simulate_many(
    trace: Trace, scheduler: str, seed: int, trials: int, workers: int = 1
) -> np.ndarray:
    """Realized gains of `trials` independent runs; identical for any worker count."""
    if scheduler not in SCHEDULERS:
        raise ModelError(f"unknown scheduler {scheduler!r}")
    if trials < 0:
        raise ModelError(f"trials must be non-negative, got {trials}")
    if trials == 0:
        return np.zeros(0)
    if workers <= 1:
        return _gains_for_range((trace, scheduler, seed, 0, trials))
    chunk = -(-trials // workers)
    jobs = [
        (trace, scheduler, seed, lo, min(chunk, trials - lo))
        for lo in range(0, trials, chunk)
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_gains_for_range, jobs))
    return np.concatenate(parts)


def opt_value_of(trace: Trace) -> float:
    """Offline optimum of the realized instance behind a trace."""
    realized = realize_deadlines(trace) if trace.kind == ORDINAL else trace
    return opt_greedy(realized).value


def build_report(
    trace: Trace, scheduler: str, seed: int, trials: int, workers: int = 1
) -> RunReport:
    """Simulate and compare against the exact offline optimum."""
    gains = simulate_many(trace, scheduler, seed, trials, workers)
    opt_value = opt_value_of(trace)
    if opt_value > 0:
        ratios = gains / opt_value
    else:
        ratios = np.ones_like(gains)  # vacuous competitiveness on empty optima
    mean_ratio = float(ratios.mean()) if trials else 1.0
    if trials > 1:
        half = float(Z_95 * ratios.std(ddof=1) / math.sqrt(trials))
    else:
        half = 0.0
    return RunReport(
        scheduler=scheduler,
        seed=seed,
        trials=trials,
        opt_value=opt_value,
        gains=tuple(float(g) for g in gains),
        ratios=tuple(float(r) for r in ratios),
        mean_ratio=mean_ratio,
        ci_half_width=half,
    )
