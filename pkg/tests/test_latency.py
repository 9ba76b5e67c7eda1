"""Tests for the latency and memory model."""

import numpy as np
import pytest

from entnet import LatencyReport, SourceLocation, TimingParams, latency_model


def params(distance=1000.0, speed=2e8, period=1e-5, k=3, sensors=4):
    return TimingParams(distance, speed, period, k, sensors)


class TestLatencyModel:
    def test_reference_case(self):
        rep = latency_model(params(), SourceLocation.AT_SENSORS, distill=False)
        assert rep.latency == pytest.approx(3e-5, rel=1e-12)
        assert rep.sensor_memories == 4  # ceil(2L/(c tau)) + k = 1 + 3
        assert rep.hub_memories == 12  # S * k

    def test_hub_source_case(self):
        rep = latency_model(params(), SourceLocation.AT_HUB, distill=False)
        assert rep.latency == pytest.approx(3.5e-5, rel=1e-12)
        assert rep.sensor_memories == 4
        assert rep.hub_memories == 16  # S * (ceil + k)

    def test_distilled_cases(self):
        sensors_rep = latency_model(params(), SourceLocation.AT_SENSORS, distill=True)
        hub_rep = latency_model(params(), SourceLocation.AT_HUB, distill=True)
        assert sensors_rep.latency == pytest.approx(4e-5, rel=1e-12)
        assert sensors_rep.sensor_memories == 5  # ceil(4L/(c tau)) + k = 2 + 3
        assert sensors_rep.hub_memories == 16
        assert hub_rep.latency == pytest.approx(3.5e-5, rel=1e-12)

    def test_orderings_random_draws(self):
        rng = np.random.default_rng(31)
        for _ in range(1000):
            p = TimingParams(
                distance=float(rng.uniform(1, 1e6)),
                signal_speed=float(rng.uniform(1e6, 3e8)),
                attempt_period=float(rng.uniform(1e-9, 1.0)),
                block_length=int(rng.integers(1, 50)),
                sensors=int(rng.integers(1, 30)),
            )
            plain_sensors = latency_model(p, SourceLocation.AT_SENSORS, False).latency
            plain_hub = latency_model(p, SourceLocation.AT_HUB, False).latency
            dist_sensors = latency_model(p, SourceLocation.AT_SENSORS, True).latency
            dist_hub = latency_model(p, SourceLocation.AT_HUB, True).latency
            assert plain_sensors < plain_hub
            assert dist_hub < dist_sensors

    def test_affine_in_block_length(self):
        for source in SourceLocation:
            for distill in (False, True):
                lat = [
                    latency_model(params(k=k), source, distill).latency for k in (1, 2, 5, 9)
                ]
                slope = (lat[1] - lat[0]) / 1
                assert slope == pytest.approx(1e-5, rel=1e-9)
                assert lat[3] - lat[0] == pytest.approx(8e-5, rel=1e-9)

    def test_memory_monotone_in_k_and_distance(self):
        for source in SourceLocation:
            for distill in (False, True):
                prev = latency_model(params(k=1), source, distill)
                for k in (2, 4, 8):
                    cur = latency_model(params(k=k), source, distill)
                    assert cur.sensor_memories >= prev.sensor_memories
                    assert cur.hub_memories >= prev.hub_memories
                    prev = cur
                near = latency_model(params(distance=10.0), source, distill)
                far = latency_model(params(distance=1e5), source, distill)
                assert far.sensor_memories >= near.sensor_memories
                assert far.hub_memories >= near.hub_memories

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            TimingParams(-1.0, 2e8, 1e-5, 1, 2)
        with pytest.raises(ValueError):
            TimingParams(10.0, 2e8, 1e-5, 0, 2)
        with pytest.raises(ValueError):
            LatencyReport(-1.0, 0, 0)
