# sim/timing.py - Compute and transmission latency of one device in one round
import math
from dataclasses import dataclass
from typing import Mapping, Tuple

from core.domain import DeviceProfile, WorkloadProfile
from sim.variance import InterferenceState, NetworkSample


@dataclass(frozen=True)
class TimingBreakdown:
    """Seconds spent busy, transmitting and idle-waiting within one round.

    `busy_split` optionally spreads t_busy over power-curve levels; when empty,
    all of t_busy counts at the curve's nominal level.
    """

    t_busy: float
    t_tx: float
    t_idle: float
    t_round: float
    busy_split: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        if min(self.t_busy, self.t_tx, self.t_idle, self.t_round) < 0:
            raise ValueError("timings must be non-negative")

    @property
    def latency(self) -> float:
        return self.t_busy + self.t_tx


def slowdown_factor(device: DeviceProfile, interference: InterferenceState) -> float:
    """Throughput multiplier 1 / (1 + a*co_cpu + b*co_mem)"""
    return 1.0 / (1.0 + device.cpu_slowdown * interference.co_cpu + device.mem_slowdown * interference.co_mem)


def compute_time(
    device: DeviceProfile,
    workload: WorkloadProfile,
    n_k: int,
    B: int,
    E: int,
    interference: InterferenceState,
) -> float:
    if n_k < 1:
        raise ValueError("n_k must be at least 1")
    # every optimizer step also costs step_overhead_samples extra sample passes
    passes = n_k + workload.step_overhead_samples * math.ceil(n_k / B)
    flops = workload.flops_per_sample_pass * passes * E
    rate = device.throughput * workload.throughput_multiplier * 1e9
    return flops / (rate * slowdown_factor(device, interference))


def comm_time(payload_bits: int, net: NetworkSample) -> float:
    if payload_bits <= 0:
        raise ValueError("payload must be positive")
    return payload_bits / (net.bandwidth * 1e6)


def round_time(per_device_times: Mapping[int, float]) -> float:
    """The straggler sets the round"""
    if not per_device_times:
        raise ValueError("round has no participants")
    return max(per_device_times.values())
