import numpy as np
import pytest

import bdsched as bd
from bdsched.generators import GenConfig, SpanDist, WeightDist, generate, random_buffer
from bdsched.simulate import simulate_trial


class TestGenerate:
    def test_same_seed_same_trace(self):
        cfg = GenConfig(steps=40, arrival_rate=1.2, seed=4)
        assert generate(cfg) == generate(cfg)

    def test_different_seeds_differ(self):
        a = generate(GenConfig(steps=40, arrival_rate=1.2, seed=1))
        b = generate(GenConfig(steps=40, arrival_rate=1.2, seed=2))
        assert a != b

    def test_zero_rate_gives_empty_trace(self):
        trace = generate(GenConfig(steps=20, arrival_rate=0.0, seed=0))
        assert trace.packets() == []

    def test_s_bounded_caps_spans(self):
        cfg = GenConfig(steps=50, arrival_rate=2.0, span_dist=SpanDist("uniform", 9),
                        s_bounded=2, seed=5)
        for p in generate(cfg).packets():
            assert p.deadline.value - p.arrival + 1 <= 2

    def test_constant_span(self):
        cfg = GenConfig(steps=30, arrival_rate=1.5, span_dist=SpanDist("constant", 3), seed=6)
        for p in generate(cfg).packets():
            assert p.deadline.value - p.arrival + 1 == 3

    def test_weight_kinds(self):
        for kind in ("log-uniform", "uniform"):
            cfg = GenConfig(steps=30, arrival_rate=2.0,
                            weight_dist=WeightDist(kind, 0.25, 0.75), seed=7)
            weights = [p.weight for p in generate(cfg).packets()]
            assert weights and all(0.25 <= w <= 0.75 for w in weights)
        grid_cfg = GenConfig(steps=30, arrival_rate=2.0,
                             weight_dist=WeightDist("geometric-grid", 0.1, 1.0, levels=4),
                             seed=8)
        grid = set(np.geomspace(0.1, 1.0, num=4))
        assert {p.weight for p in generate(grid_cfg).packets()} <= grid

    def test_ordinal_traces_are_replayable(self):
        # every expire_prefix must be admissible for a scheduler transmitting
        # whenever its buffer is non-empty
        for seed in range(15):
            cfg = GenConfig(steps=60, arrival_rate=1.0, model=bd.ORDINAL, seed=seed)
            trace = generate(cfg)
            rng = np.random.default_rng(0)
            simulate_trial(trace, "edf", rng)  # raises TraceError if not

    def test_trace_file_round_trip(self, tmp_path):
        for model in (bd.NUMERIC, bd.ORDINAL):
            trace = generate(GenConfig(steps=40, arrival_rate=1.5, model=model, seed=11))
            path = tmp_path / f"{model}.jsonl"
            bd.write_trace(trace, path)
            first = path.read_bytes()
            assert bd.read_trace(path) == trace
            bd.write_trace(bd.read_trace(path), path)
            assert path.read_bytes() == first

    def test_config_validation(self):
        with pytest.raises(bd.ConfigError):
            GenConfig(steps=-1)
        with pytest.raises(bd.ConfigError):
            GenConfig(arrival_rate=-0.5)
        with pytest.raises(bd.ConfigError):
            WeightDist("uniform", lo=0.0)
        with pytest.raises(bd.ConfigError):
            WeightDist("bogus")
        with pytest.raises(bd.ConfigError):
            SpanDist("uniform", 0)
        with pytest.raises(bd.ConfigError):
            GenConfig(s_bounded=0)

    def test_config_dict_round_trip(self):
        cfg = GenConfig(steps=25, arrival_rate=0.8,
                        weight_dist=WeightDist("uniform", 0.2, 0.9),
                        span_dist=SpanDist("constant", 2), s_bounded=2,
                        model=bd.ORDINAL, seed=13)
        assert GenConfig.from_dict(cfg.to_dict()) == cfg


class TestRandomBuffer:
    def test_respects_bounds(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            buf = random_buffer(rng, max_size=20, w_lo=1e-3, w_hi=1.0)
            assert 1 <= len(buf) <= 20
            assert all(1e-3 <= p.weight <= 1.0 for p in buf.packets)
            assert sorted(p.deadline.value for p in buf.packets) == list(range(len(buf)))


class TestTightnessBuffer:
    def test_k2_weights(self):
        buf = bd.tightness_buffer(2)
        assert [p.weight for p in buf.packets] == [np.exp(-0.5), 1.0]
        assert bd.heaviest(buf).weight == 1.0

    def test_every_packet_selectable(self):
        for k in (2, 5, 17, 100):
            assert len(bd.rmix_distribution(bd.tightness_buffer(k)).atoms) == k

    def test_k_below_two_rejected(self):
        with pytest.raises(bd.ConfigError):
            bd.tightness_buffer(1)
