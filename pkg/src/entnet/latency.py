"""Latency and quantum-memory budgets of the block protocols.

Four architecture cases: the raw pairs are born at the sensors or at the
hub, with or without a distillation round before the hub's GHZ
projections.  GHZ projections are treated as instantaneous; classical
heralds travel at the same signal speed as the photons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = ["SourceLocation", "TimingParams", "LatencyReport", "latency_model"]


class SourceLocation(Enum):
    AT_SENSORS = "sensors"
    AT_HUB = "hub"


@dataclass(frozen=True)
class TimingParams:
    """Geometry and timing of the star: distance (m), signal speed (m/s),
    attempt period (s), block length, sensor count."""

    distance: float
    signal_speed: float
    attempt_period: float
    block_length: int
    sensors: int

    def __post_init__(self) -> None:
        if self.distance <= 0 or self.signal_speed <= 0 or self.attempt_period <= 0:
            raise ValueError("distance, signal speed and attempt period must be positive")
        if self.block_length < 1:
            raise ValueError(f"block length must be >= 1, got {self.block_length}")
        if self.sensors < 1:
            raise ValueError(f"need at least 1 sensor, got {self.sensors}")


@dataclass(frozen=True)
class LatencyReport:
    latency: float
    sensor_memories: int
    hub_memories: int

    def __post_init__(self) -> None:
        if self.latency < 0 or self.sensor_memories < 0 or self.hub_memories < 0:
            raise ValueError("latency and memory counts cannot be negative")


def latency_model(
    params: TimingParams, source: SourceLocation, distill: bool = False
) -> LatencyReport:
    """Sensing latency and memory requirements for one architecture case.

    Without distillation the sensor-side source wins on latency (one less
    one-way trip); with distillation the extra measurement exchange flips
    the ordering in favour of the hub-side source.
    """
    travel = params.distance / params.signal_speed
    wait = (params.block_length - 1) * params.attempt_period
    depth = math.ceil(2.0 * params.distance / (params.signal_speed * params.attempt_period))
    k, sensors = params.block_length, params.sensors
    if source is SourceLocation.AT_SENSORS and not distill:
        return LatencyReport(2.0 * travel + wait, depth + k, sensors * k)
    if source is SourceLocation.AT_HUB and not distill:
        return LatencyReport(3.0 * travel + wait, depth + k, sensors * (depth + k))
    if source is SourceLocation.AT_SENSORS:
        deep = math.ceil(
            4.0 * params.distance / (params.signal_speed * params.attempt_period)
        )
        return LatencyReport(4.0 * travel + wait, deep + k, sensors * (depth + k))
    return LatencyReport(3.0 * travel + wait, depth + k, sensors * (depth + k))
