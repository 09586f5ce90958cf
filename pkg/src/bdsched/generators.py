"""Instance generators for experiments.

Defaults favor competitive-ratio stress: Poisson arrivals and log-uniform
weights (ratio pressure grows with weight spread).  Everything is
deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import (
    NUMERIC,
    ORDINAL,
    BufferState,
    DeadlineKey,
    Packet,
    StepEvent,
    Trace,
)

WEIGHT_KINDS = ("log-uniform", "uniform", "geometric-grid")
SPAN_KINDS = ("uniform", "constant")


@dataclass(frozen=True)
class WeightDist:
    """Packet weight distribution.

    log-uniform / uniform draw from [lo, hi]; geometric-grid draws uniformly
    from `levels` geometrically spaced points between lo and hi.
    """

    kind: str = "log-uniform"
    lo: float = 1e-3
    hi: float = 1.0
    levels: int = 8

    def __post_init__(self) -> None:
        if self.kind not in WEIGHT_KINDS:
            raise ConfigError(f"unknown weight distribution {self.kind!r}")
        if not 0 < self.lo <= self.hi:
            raise ConfigError(f"need 0 < lo <= hi, got lo={self.lo}, hi={self.hi}")
        if self.kind == "geometric-grid" and self.levels < 1:
            raise ConfigError("geometric-grid needs at least one level")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.lo, self.hi, size=n)
        if self.kind == "log-uniform":
            return np.exp(rng.uniform(math.log(self.lo), math.log(self.hi), size=n))
        grid = np.geomspace(self.lo, self.hi, num=self.levels)
        return grid[rng.integers(0, len(grid), size=n)]


@dataclass(frozen=True)
class SpanDist:
    """Distribution of deadline - arrival + 1 (in steps, >= 1)."""

    kind: str = "uniform"
    s: int = 4

    def __post_init__(self) -> None:
        if self.kind not in SPAN_KINDS:
            raise ConfigError(f"unknown span distribution {self.kind!r}")
        if self.s < 1:
            raise ConfigError(f"span bound must be >= 1, got {self.s}")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n, self.s, dtype=int)
        return rng.integers(1, self.s + 1, size=n)


@dataclass(frozen=True)
class GenConfig:
    steps: int = 50
    arrival_rate: float = 1.0
    weight_dist: WeightDist = field(default_factory=WeightDist)
    span_dist: SpanDist = field(default_factory=SpanDist)
    s_bounded: int | None = None
    model: str = NUMERIC
    seed: int = 0

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ConfigError(f"steps must be non-negative, got {self.steps}")
        if self.arrival_rate < 0:
            raise ConfigError(f"arrival rate must be non-negative, got {self.arrival_rate}")
        if self.s_bounded is not None and self.s_bounded < 1:
            raise ConfigError(f"s_bounded must be >= 1, got {self.s_bounded}")
        if self.model not in (NUMERIC, ORDINAL):
            raise ConfigError(f"model must be numeric or ordinal, got {self.model!r}")

    @classmethod
    def from_dict(cls, obj: dict) -> GenConfig:
        try:
            weights = WeightDist(**obj.get("weights", {}))
            span = SpanDist(**obj.get("span", {}))
            return cls(
                steps=int(obj.get("steps", 50)),
                arrival_rate=float(obj.get("rate", 1.0)),
                weight_dist=weights,
                span_dist=span,
                s_bounded=obj.get("s_bounded"),
                model=obj.get("model", NUMERIC),
                seed=int(obj.get("seed", 0)),
            )
        except TypeError as exc:
            raise ConfigError(f"invalid generator config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "rate": self.arrival_rate,
            "weights": {
                "kind": self.weight_dist.kind,
                "lo": self.weight_dist.lo,
                "hi": self.weight_dist.hi,
                "levels": self.weight_dist.levels,
            },
            "span": {"kind": self.span_dist.kind, "s": self.span_dist.s},
            "s_bounded": self.s_bounded,
            "model": self.model,
            "seed": self.seed,
        }


def generate(config: GenConfig) -> Trace:
    """Deterministic trace from the config seed.

    Ordinal traces get expiration ranks in pseudo-deadline order plus random
    expire_prefix events, capped so that every scheduler that transmits
    whenever its buffer is non-empty can replay them.
    """
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    events: list[StepEvent] = []
    next_id = 0
    floor_size = 0  # pending-count lower bound under one transmission per step

    for t in range(config.steps):
        n = int(rng.poisson(config.arrival_rate))
        arrivals = []
        if n:
            weights = config.weight_dist.draw(rng, n)
            spans = config.span_dist.draw(rng, n)
            if config.s_bounded is not None:
                spans = np.minimum(spans, config.s_bounded)
            for w, span in zip(weights, spans):
                due = t + int(span) - 1
                deadline = (
                    DeadlineKey.numeric(due)
                    if config.model == NUMERIC
                    else DeadlineKey.ordinal(due)
                )
                arrivals.append(Packet(id=next_id, weight=float(w), deadline=deadline, arrival=t))
                next_id += 1

        expire_prefix = None
        if config.model == ORDINAL:
            floor_size = max(0, floor_size + n - 1)
            prefix = min(int(rng.poisson(0.5)), floor_size)
            floor_size -= prefix
            expire_prefix = prefix if prefix > 0 else None
        if not arrivals and expire_prefix is None:
            continue
        events.append(StepEvent(step=t, arrivals=tuple(arrivals), expire_prefix=expire_prefix))

    return Trace(config.model, tuple(events))


def random_buffer(
    rng: np.random.Generator,
    max_size: int = 20,
    w_lo: float = 1e-3,
    w_hi: float = 1.0,
    kind: str = NUMERIC,
) -> BufferState:
    """Random standalone buffer: log-uniform weights, permuted deadlines."""
    if not 0 < w_lo <= w_hi:
        raise ConfigError(f"need 0 < w_lo <= w_hi, got {w_lo}, {w_hi}")
    n = int(rng.integers(1, max_size + 1))
    weights = np.exp(rng.uniform(math.log(w_lo), math.log(w_hi), size=n))
    deadlines = rng.permutation(n)
    make = DeadlineKey.numeric if kind == NUMERIC else DeadlineKey.ordinal
    return BufferState.from_packets(
        Packet(id=i, weight=float(weights[i]), deadline=make(int(deadlines[i])))
        for i in range(n)
    )


def tightness_buffer(k: int) -> BufferState:
    """Buffer that nearly attains the 1 - 1/e per-step bound.

    k packets with weights e^(-1 + i/k), i = 1..k, in increasing weight =
    increasing deadline order, so every packet is a strict prefix maximum
    and the pick's weight tracks e^x * w_h within a factor e^(1/k).
    """
    if k < 2:
        raise ConfigError(f"tightness buffer needs k >= 2, got {k}")
    return BufferState.from_packets(
        Packet(id=i - 1, weight=math.exp(-1.0 + i / k), deadline=DeadlineKey.numeric(i))
        for i in range(1, k + 1)
    )
