import numpy as np
import pytest

import bdsched as bd
from bdsched import DeadlineKey, Packet, StepEvent, Trace
from bdsched.generators import GenConfig, SpanDist, generate
from bdsched.simulate import simulate_trial
from conftest import random_instance


def _trace(packets):
    by_step = {}
    for p in packets:
        by_step.setdefault(p.arrival, []).append(p)
    events = tuple(StepEvent(s, tuple(ps)) for s, ps in sorted(by_step.items()))
    return Trace(bd.NUMERIC, events)


def npkt(i, w, d, arr=0):
    return Packet(i, w, DeadlineKey.numeric(d), arr)


class TestOptGreedy:
    def test_one_slot_two_packets(self):
        trace = _trace([npkt(0, 1.0, 1, 1), npkt(1, 2.0, 1, 1)])
        schedule = bd.opt_greedy(trace)
        assert schedule.value == 2.0
        assert schedule.assignments == ((1, 1),)

    def test_both_fit(self):
        trace = _trace([npkt(0, 1.0, 1), npkt(1, 2.0, 2)])
        schedule = bd.opt_greedy(trace)
        assert schedule.value == 3.0
        slots = {pid: step for step, pid in schedule.assignments}
        assert slots[0] <= 1 and slots[1] <= 2 and slots[0] != slots[1]

    def test_rearrangement_needed(self):
        # the heavy late-window packet forces the early one out of slot 1
        trace = _trace([npkt(0, 1.0, 1), npkt(1, 2.0, 1, 1)])
        schedule = bd.opt_greedy(trace)
        assert schedule.value == 3.0
        assert dict(schedule.assignments) == {0: 0, 1: 1}

    def test_assignments_respect_windows(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            trace = random_instance(rng)
            windows = {p.id: (p.arrival, p.deadline.value) for p in trace.packets()}
            schedule = bd.opt_greedy(trace)
            steps = [s for s, _ in schedule.assignments]
            assert len(steps) == len(set(steps))
            for step, pid in schedule.assignments:
                lo, hi = windows[pid]
                assert lo <= step <= hi

    def test_ordinal_rejected(self):
        trace = Trace(bd.ORDINAL, ())
        with pytest.raises(bd.ModelError):
            bd.opt_greedy(trace)


class TestOptBrute:
    def test_empty(self):
        assert bd.opt_brute(_trace([])).value == 0.0

    def test_singleton(self):
        assert bd.opt_brute(_trace([npkt(0, 0.7, 2)])).value == 0.7

    def test_size_guard(self):
        packets = [npkt(i, 1.0, 20) for i in range(13)]
        with pytest.raises(bd.ConfigError):
            bd.opt_brute(_trace(packets))

    def test_greedy_equals_brute(self):
        rng = np.random.default_rng(52)
        for _ in range(60):
            trace = random_instance(rng)
            assert bd.opt_greedy(trace).value == bd.opt_brute(trace).value


class TestOptMonotonicity:
    def test_adding_a_packet_never_hurts(self):
        rng = np.random.default_rng(53)
        for _ in range(30):
            trace = random_instance(rng, max_packets=6)
            packets = trace.packets()
            extra = npkt(100, float(rng.uniform(0.1, 1.0)), 3, 0)
            bigger = _trace(packets + [extra])
            assert bd.opt_greedy(bigger).value >= bd.opt_greedy(trace).value

    def test_raising_a_deadline_never_hurts(self):
        rng = np.random.default_rng(54)
        for _ in range(30):
            trace = random_instance(rng, max_packets=6)
            packets = trace.packets()
            if not packets:
                continue
            p = packets[0]
            raised = Packet(p.id, p.weight, DeadlineKey.numeric(p.deadline.value + 3), p.arrival)
            assert (
                bd.opt_greedy(_trace([raised] + packets[1:])).value
                >= bd.opt_greedy(trace).value
            )


class TestOnlineNeverBeatsOpt:
    @pytest.mark.parametrize("scheduler", ["rmix", "greedy", "edf"])
    @pytest.mark.parametrize("model", [bd.NUMERIC, bd.ORDINAL])
    def test_gain_at_most_opt(self, scheduler, model):
        for seed in range(8):
            trace = generate(
                GenConfig(steps=25, arrival_rate=1.5, span_dist=SpanDist("uniform", 5),
                          model=model, seed=seed)
            )
            opt = bd.opt_value_of(trace)
            for trial in range(4):
                rng = np.random.Generator(np.random.PCG64(trial))
                gain = simulate_trial(trace, scheduler, rng)
                assert gain <= opt + 1e-9


class TestRealizeDeadlines:
    def test_no_expirations_deadlines_at_horizon(self):
        events = (
            StepEvent(0, (Packet(0, 1.0, DeadlineKey.ordinal(0)),)),
            StepEvent(3, (Packet(1, 2.0, DeadlineKey.ordinal(1), 3),)),
        )
        realized = bd.realize_deadlines(Trace(bd.ORDINAL, events))
        assert [p.deadline.value for p in realized.packets()] == [3, 3]

    def test_expiry_step_becomes_deadline(self):
        # the rank-0 packet is removed by the prefix event of step 3; it was
        # transmittable in step 3, since expiry follows transmission
        events = (
            StepEvent(0, (Packet(0, 1.0, DeadlineKey.ordinal(0)),
                          Packet(1, 2.0, DeadlineKey.ordinal(5)))),
            StepEvent(3, (), expire_prefix=1),
            StepEvent(4, (Packet(2, 1.5, DeadlineKey.ordinal(2), 4),)),
        )
        realized = bd.realize_deadlines(Trace(bd.ORDINAL, events))
        deadlines = {p.id: p.deadline.value for p in realized.packets()}
        assert deadlines == {0: 3, 1: 4, 2: 4}

    def test_whole_buffer_expiry(self):
        events = (
            StepEvent(0, (Packet(0, 1.0, DeadlineKey.ordinal(0)),
                          Packet(1, 2.0, DeadlineKey.ordinal(1)))),
            StepEvent(2, (), expire_prefix=2),
            StepEvent(5, (Packet(2, 1.0, DeadlineKey.ordinal(9), 5),)),
        )
        realized = bd.realize_deadlines(Trace(bd.ORDINAL, events))
        deadlines = {p.id: p.deadline.value for p in realized.packets()}
        assert deadlines == {0: 2, 1: 2, 2: 5}

    def test_inconsistent_prefix_rejected(self):
        events = (StepEvent(0, (), expire_prefix=1),)
        with pytest.raises(bd.TraceError):
            bd.realize_deadlines(Trace(bd.ORDINAL, events))

    def test_numeric_trace_rejected(self):
        with pytest.raises(bd.ModelError):
            bd.realize_deadlines(Trace(bd.NUMERIC, ()))

    def test_realization_dominates_every_online_run(self):
        # packets pending in any always-transmitting run are pending in the
        # transmission-free replay, so realized windows cover all online gains
        for seed in range(10):
            trace = generate(
                GenConfig(steps=30, arrival_rate=1.8, span_dist=SpanDist("uniform", 5),
                          model=bd.ORDINAL, seed=seed)
            )
            opt = bd.opt_greedy(bd.realize_deadlines(trace)).value
            for trial in range(3):
                rng = np.random.Generator(np.random.PCG64(trial))
                assert simulate_trial(trace, "rmix", rng) <= opt + 1e-9
