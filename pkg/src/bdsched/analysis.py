"""Per-step expectations, ratio certificates, and the adaptive-adversary harness.

The central quantity is the per-step ratio E[RMix] / E[ADV'], where ADV' is
the adversary's amortized gain under buffer synchronization: both players
share a buffer; after both transmit, the adversary's buffer is edited back
into the algorithm's.  With f the algorithm's pick and j the adversary's:

  * f = j: nothing to fix; the adversary is credited w_j.
  * f earlier than j: the adversary's pending copy of f is upgraded to j
    (heavier and later, by the greediness property), credit w_j.
  * j earlier than f: the adversary additionally transmits f and gets j
    reinserted, credit w_j + w_f.

In every case the shared buffer simply loses f, so a single buffer suffices;
`run_adaptive(dual_buffer_check=True)` replays both buffers explicitly and
asserts they stay equal, which is the fidelity test for that bookkeeping.

`step_certificate` evaluates the ratio exactly (via the finite selection
distribution) for every admissible adversary choice and checks it against
1 - 1/e, the per-step form of the competitive guarantee.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import HarnessError, ModelError, TraceError
from .model import (
    NUMERIC,
    BufferState,
    Packet,
    Trace,
    heaviest,
    pareto_frontier,
)
from .schedulers import SelectionDistribution, rmix_choose, rmix_distribution

RATIO_BOUND = 1.0 - 1.0 / math.e
DEFAULT_TOLERANCE = 1e-9


def buffer_digest(buffer: BufferState) -> str:
    """Stable short hash of buffer contents (ids, exact weights, deadlines)."""
    h = hashlib.sha256()
    h.update(buffer.kind.encode())
    for p in buffer.packets:
        h.update(f"|{p.id}:{p.weight.hex()}:{p.deadline.value}".encode())
    return h.hexdigest()[:16]


def _require_frontier(buffer: BufferState, j: Packet | int) -> Packet:
    packet = buffer.get(j.id if isinstance(j, Packet) else j)
    if packet is None:
        raise HarnessError(f"adversary choice {j!r} is not pending")
    prefix_max = 0.0
    for p in buffer.packets:
        if p.id == packet.id:
            break
        prefix_max = max(prefix_max, p.weight)
    if packet.weight < prefix_max:
        # greediness is a restriction of the adversary's action set, not a repair
        raise HarnessError(
            f"adversary choice {packet.id} is off the frontier: a strictly "
            f"heavier, strictly earlier packet is pending"
        )
    return packet


def expected_rmix_gain(buffer: BufferState) -> float:
    """Exact expected transmitted weight of one RMix step (0 for empty buffers)."""
    if not buffer:
        return 0.0
    return rmix_distribution(buffer).expected_weight()


def expected_adv_gain(
    buffer: BufferState,
    j: Packet | int,
    dist: SelectionDistribution | None = None,
) -> tuple[float, float]:
    """Expected amortized adversary gain for frontier choice j.

    Returns (y, value) with y = log(w_j / w_h).  The value is computed two
    ways and cross-checked: a case split per selection atom (the pick f
    contributes w_f exactly on the atoms strictly later than j), and the
    closed form w_j plus the integral of w_f over x in [max(y, -1), 0]
    excluding f = j.
    """
    packet = _require_frontier(buffer, j)
    if dist is None:
        dist = rmix_distribution(buffer)
    w_h = heaviest(buffer).weight
    w_j = packet.weight
    y = math.log(w_j / w_h)
    j_key = packet.sort_key

    by_cases = 0.0
    for a in dist.atoms:
        if j_key < a.packet.sort_key:  # j strictly earlier: credit w_j + w_f
            by_cases += a.probability * (w_j + a.packet.weight)
        else:  # f no later than j (includes f = j): credit w_j alone
            by_cases += a.probability * w_j

    lo_clip = max(y, -1.0)
    by_integral = w_j
    for a in dist.atoms:
        if a.packet.id == packet.id:
            continue
        lo = max(a.lo, lo_clip)
        if a.hi > lo:
            by_integral += (a.hi - lo) * a.packet.weight

    assert math.isclose(by_cases, by_integral, rel_tol=1e-9, abs_tol=1e-12), (
        f"amortized-gain case analysis {by_cases} disagrees with "
        f"closed form {by_integral}"
    )
    return y, by_cases


@dataclass(frozen=True)
class CertificateRow:
    """Ratio evaluation for one adversary choice j."""

    j: int
    y: float
    e_adv: float
    ratio: float

    def to_dict(self) -> dict:
        return {"j": self.j, "y": self.y, "e_adv": self.e_adv, "ratio": self.ratio}


@dataclass(frozen=True)
class StepCertificate:
    """Exact per-step check of E[RMix] / E[ADV'] >= 1 - 1/e for one buffer."""

    buffer_digest: str
    e_rmix: float
    e_rmix_var: float
    rows: tuple[CertificateRow, ...]
    min_ratio: float
    passed: bool

    def row_for(self, packet_id: int) -> CertificateRow:
        for row in self.rows:
            if row.j == packet_id:
                return row
        raise HarnessError(f"packet {packet_id} is not an admissible adversary choice")

    def to_dict(self) -> dict:
        return {
            "buffer_digest": self.buffer_digest,
            "e_rmix": self.e_rmix,
            "rows": [r.to_dict() for r in self.rows],
            "min_ratio": self.min_ratio,
            "passed": self.passed,
        }


def step_certificate(
    buffer: BufferState, tolerance: float = DEFAULT_TOLERANCE
) -> StepCertificate:
    """Evaluate the per-step ratio for every Pareto-frontier adversary choice."""
    if not buffer:
        raise ModelError("cannot certify an empty buffer")
    dist = rmix_distribution(buffer)
    e_rmix = dist.expected_weight()
    rows = []
    min_ratio = math.inf
    for j in pareto_frontier(buffer):
        y, e_adv = expected_adv_gain(buffer, j, dist=dist)
        ratio = e_rmix / e_adv
        rows.append(CertificateRow(j.id, y, e_adv, ratio))
        if ratio < min_ratio:
            min_ratio = ratio
    return StepCertificate(
        buffer_digest=buffer_digest(buffer),
        e_rmix=e_rmix,
        e_rmix_var=dist.weight_variance(),
        rows=tuple(rows),
        min_ratio=min_ratio,
        passed=min_ratio >= RATIO_BOUND - tolerance,
    )


# --- adversary harness ---------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    """One transmission step of a harness run."""

    step: int
    x: float
    f: int
    j: int
    case_taken: str  # "equal" | "case1" | "case2"
    modification: str | None
    e_rmix: float
    e_adv: float
    ratio: float


@dataclass
class HarnessState:
    """Running totals of a harness run; the buffer is shared by construction."""

    buffer: BufferState
    alg_total: float = 0.0
    adv_total: float = 0.0
    expected_alg_total: float = 0.0
    expected_adv_total: float = 0.0
    expected_alg_var_total: float = 0.0
    log: list[StepRecord] = field(default_factory=list)


def harness_step(
    state: HarnessState,
    adv_choice: Packet | int,
    x: float,
    step: int = 0,
    cert: StepCertificate | None = None,
) -> HarnessState:
    """Advance the harness by one transmission against adversary choice j.

    Accumulates realized gains and, conditioned on the buffer seen this
    step, the exact expected gains of both players.  The shared buffer
    loses exactly the algorithm's pick.
    """
    buffer = state.buffer
    if not buffer:
        raise HarnessError("cannot transmit from an empty buffer")
    if not -1.0 <= x <= 0.0:
        raise HarnessError(f"x must lie in [-1, 0], got {x}")
    j = _require_frontier(buffer, adv_choice)
    if cert is None or cert.buffer_digest != buffer_digest(buffer):
        cert = step_certificate(buffer)
    row = cert.row_for(j.id)

    f = rmix_choose(buffer, x).packet
    assert f is not None
    if f.id == j.id:
        case, modification = "equal", None
        credit = j.weight
    elif f.sort_key < j.sort_key:
        case, modification = "case1", f"upgrade pending {f.id} to {j.id}"
        credit = j.weight
    else:
        case, modification = "case2", f"transmit {f.id} additionally, reinsert {j.id}"
        credit = j.weight + f.weight

    state.alg_total += f.weight
    state.adv_total += credit
    state.expected_alg_total += cert.e_rmix
    state.expected_adv_total += row.e_adv
    state.expected_alg_var_total += cert.e_rmix_var
    state.buffer = buffer.remove((f.id,))
    state.log.append(
        StepRecord(
            step=step,
            x=x,
            f=f.id,
            j=j.id,
            case_taken=case,
            modification=modification,
            e_rmix=cert.e_rmix,
            e_adv=row.e_adv,
            ratio=row.ratio,
        )
    )
    return state


AdversaryFn = Callable[[BufferState, StepCertificate, np.random.Generator, int], Packet]


def _frontier_heaviest(buffer, cert, rng, step) -> Packet:
    return heaviest(buffer)


def _frontier_earliest(buffer, cert, rng, step) -> Packet:
    return buffer.packets[0]


def _min_ratio(buffer, cert, rng, step) -> Packet:
    worst = min(cert.rows, key=lambda r: r.ratio)
    return buffer.get(worst.j)


def _random_frontier(buffer, cert, rng, step) -> Packet:
    frontier = pareto_frontier(buffer)
    return frontier[int(rng.integers(len(frontier)))]


ADVERSARIES: dict[str, AdversaryFn] = {
    "frontier-heaviest": _frontier_heaviest,
    "frontier-earliest": _frontier_earliest,
    "min-ratio": _min_ratio,
    "random-frontier": _random_frontier,
}


def scripted_adversary(moves: dict[int, int]) -> AdversaryFn:
    """Adversary that plays a fixed packet id per step (trace error if absent)."""

    def play(buffer, cert, rng, step) -> Packet:
        if step not in moves:
            raise TraceError(f"scripted adversary has no move for step {step}")
        packet = buffer.get(moves[step])
        if packet is None:
            raise TraceError(
                f"scripted adversary references absent packet {moves[step]} at step {step}"
            )
        return packet

    return play


def get_adversary(strategy: str | AdversaryFn) -> tuple[str, AdversaryFn]:
    if callable(strategy):
        return getattr(strategy, "__name__", "custom"), strategy
    try:
        return strategy, ADVERSARIES[strategy]
    except KeyError:
        raise ModelError(
            f"unknown adversary strategy {strategy!r}; expected one of {sorted(ADVERSARIES)}"
        ) from None


@dataclass(frozen=True)
class HarnessReport:
    """Outcome of a full adaptive run."""

    strategy: str
    seed: int
    steps: int
    action_steps: int
    alg_total: float
    adv_total: float
    expected_alg_total: float
    expected_adv_total: float
    expected_alg_var_total: float
    expected_ratio: float
    realized_ratio: float
    min_step_ratio: float
    passed: bool
    dual_buffer_checked: bool
    records: tuple[StepRecord, ...]
    certificates: tuple[StepCertificate, ...]

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "seed": self.seed,
            "steps": self.steps,
            "action_steps": self.action_steps,
            "alg_total": self.alg_total,
            "adv_total": self.adv_total,
            "expected_alg_total": self.expected_alg_total,
            "expected_adv_total": self.expected_adv_total,
            "expected_ratio": self.expected_ratio,
            "realized_ratio": self.realized_ratio,
            "min_step_ratio": self.min_step_ratio,
            "passed": self.passed,
            "dual_buffer_checked": self.dual_buffer_checked,
            "steps_log": [
                {
                    "step": r.step,
                    "x": r.x,
                    "f": r.f,
                    "j": r.j,
                    "case_taken": r.case_taken,
                    "modification": r.modification,
                    "e_rmix": r.e_rmix,
                    "e_adv": r.e_adv,
                    "ratio": r.ratio,
                }
                for r in self.records
            ],
        }


def harness_summary_rows(report: HarnessReport) -> list[dict]:
    """Plot-ready per-step rows: step, e_rmix, e_adv, ratio, case, cumulative ratio."""
    rows = []
    cum_alg = 0.0
    cum_adv = 0.0
    for r in report.records:
        cum_alg += r.e_rmix
        cum_adv += r.e_adv
        rows.append(
            {
                "step": r.step,
                "e_rmix": r.e_rmix,
                "e_adv": r.e_adv,
                "ratio": r.ratio,
                "case_taken": r.case_taken,
                "cumulative_ratio": cum_alg / cum_adv if cum_adv > 0 else 1.0,
            }
        )
    return rows


def run_adaptive(
    trace: Trace,
    strategy: str | AdversaryFn = "min-ratio",
    seed: int = 0,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    dual_buffer_check: bool = False,
    keep_certificates: bool = True,
) -> HarnessReport:
    """Run the full adaptive game over a trace.

    The adversary sees the shared buffer and the algorithm's realized past
    picks, commits its choice, and only then is x drawn.  Steps follow the
    arrivals -> transmissions -> expirations lifecycle.  With
    ``dual_buffer_check`` the two players' buffers are simulated separately
    and compared after every step.
    """
    name, play = get_adversary(strategy)
    rng_x = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    rng_adv = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))

    state = HarnessState(BufferState.empty(trace.kind))
    alg_buf = adv_buf = state.buffer  # explicit per-player buffers (debug mode)
    events = {ev.step: ev for ev in trace.events}
    first = trace.events[0].step if trace.events else 0
    certificates: list[StepCertificate] = []
    min_step_ratio = math.inf
    steps = 0
    action_steps = 0

    for step in range(first, trace.horizon + 1):
        steps += 1
        ev = events.get(step)
        arrivals = ev.arrivals if ev else ()
        state.buffer = state.buffer.add(arrivals)
        if dual_buffer_check:
            alg_buf = alg_buf.add(arrivals)
            adv_buf = adv_buf.add(arrivals)

        if state.buffer:
            action_steps += 1
            cert = step_certificate(state.buffer, tolerance)
            j = play(state.buffer, cert, rng_adv, step)
            x = float(rng_x.uniform(-1.0, 0.0))  # drawn after the adversary commits
            harness_step(state, j, x, step=step, cert=cert)
            record = state.log[-1]
            min_step_ratio = min(min_step_ratio, record.ratio)
            if keep_certificates:
                certificates.append(cert)
            if dual_buffer_check:
                f_id, j_id = record.f, record.j
                alg_buf = alg_buf.remove((f_id,))
                adv_buf = adv_buf.remove((j_id,))
                if f_id != j_id:
                    # case 1 upgrades the pending f to j; case 2 transmits f
                    # and reinserts j; either way the set edit is the same
                    reinserted = state.buffer.get(j_id)
                    adv_buf = adv_buf.remove((f_id,)).add((reinserted,))
                if not (alg_buf == adv_buf == state.buffer):
                    raise AssertionError(
                        f"buffer identity broken at step {step}: "
                        f"alg={[p.id for p in alg_buf]} adv={[p.id for p in adv_buf]} "
                        f"shared={[p.id for p in state.buffer]}"
                    )

        if trace.kind == NUMERIC:
            state.buffer = state.buffer.expire_due(step)
            if dual_buffer_check:
                alg_buf = alg_buf.expire_due(step)
                adv_buf = adv_buf.expire_due(step)
        elif ev is not None and ev.expire_prefix is not None:
            state.buffer = state.buffer.expire_first(ev.expire_prefix)
            if dual_buffer_check:
                alg_buf = alg_buf.expire_first(ev.expire_prefix)
                adv_buf = adv_buf.expire_first(ev.expire_prefix)

    expected_ratio = (
        state.expected_alg_total / state.expected_adv_total
        if state.expected_adv_total > 0
        else 1.0
    )
    realized_ratio = state.alg_total / state.adv_total if state.adv_total > 0 else 1.0
    return HarnessReport(
        strategy=name,
        seed=seed,
        steps=steps,
        action_steps=action_steps,
        alg_total=state.alg_total,
        adv_total=state.adv_total,
        expected_alg_total=state.expected_alg_total,
        expected_adv_total=state.expected_adv_total,
        expected_alg_var_total=state.expected_alg_var_total,
        expected_ratio=expected_ratio,
        realized_ratio=realized_ratio,
        min_step_ratio=min_step_ratio if state.log else 1.0,
        passed=expected_ratio >= RATIO_BOUND - tolerance,
        dual_buffer_checked=dual_buffer_check,
        records=tuple(state.log),
        certificates=tuple(certificates),
    )
