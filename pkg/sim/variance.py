# sim/variance.py - Co-runner interference and network bandwidth draws
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Sequence

import numpy as np

from core.domain import DeviceCategory, DeviceProfile, SignalTier
from core.seeding import INTF, NET, SeedStreams

logger = logging.getLogger(__name__)

BAD_SIGNAL_MBPS = 40.0
MIN_BANDWIDTH_MBPS = 1.0


@dataclass(frozen=True)
class InterferenceState:
    co_cpu: float = 0.0
    co_mem: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.co_cpu <= 1.0 and 0.0 <= self.co_mem <= 1.0):
            raise ValueError(f"interference fractions must be in [0, 1], got ({self.co_cpu}, {self.co_mem})")


NO_INTERFERENCE = InterferenceState()


def tier_for(bandwidth: float) -> SignalTier:
    return SignalTier.BAD if bandwidth <= BAD_SIGNAL_MBPS else SignalTier.REGULAR


@dataclass(frozen=True)
class NetworkSample:
    bandwidth: float  # Mbps
    signal_tier: SignalTier

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.signal_tier != tier_for(self.bandwidth):
            raise ValueError(f"tier {self.signal_tier.value} inconsistent with {self.bandwidth} Mbps")

    @classmethod
    def from_bandwidth(cls, bandwidth: float) -> "NetworkSample":
        return cls(float(bandwidth), tier_for(bandwidth))


def sample_network(mean: float, stddev: float, rng: np.random.Generator) -> NetworkSample:
    """Gaussian bandwidth, clipped below at 1 Mbps"""
    if mean <= 0 or stddev < 0:
        raise ValueError("need mean > 0 and stddev >= 0")
    bandwidth = mean + stddev * rng.standard_normal()
    return NetworkSample.from_bandwidth(max(MIN_BANDWIDTH_MBPS, float(bandwidth)))


@dataclass(frozen=True)
class InterferenceSettings:
    enabled: bool = False
    probability: float = 0.3
    co_cpu_mean: float = 0.4
    co_cpu_std: float = 0.1
    co_mem_mean: float = 0.3
    co_mem_std: float = 0.1
    frozen: bool = False
    categories: FrozenSet[DeviceCategory] = frozenset(DeviceCategory)


@dataclass(frozen=True)
class NetworkSettings:
    mean: float = 80.0
    stddev: float = 20.0
    frozen: bool = False


@dataclass(frozen=True)
class RoundEnvironment:
    """Raw per-device runtime conditions for one round"""

    round_index: int
    interference: Dict[int, InterferenceState]
    network: Dict[int, NetworkSample]


class VarianceModel:
    """Draws each device's conditions from its own (label, round, device) stream.

    Frozen settings key the draw on round 0 so every round repeats it.
    """

    def __init__(
        self,
        fleet: Sequence[DeviceProfile],
        streams: SeedStreams,
        interference: Optional[InterferenceSettings] = None,
        network: Optional[NetworkSettings] = None,
    ):
        self.fleet = list(fleet)
        self.streams = streams
        self.interference = interference or InterferenceSettings()
        self.network = network or NetworkSettings()
        self._frozen_cache: Dict[int, RoundEnvironment] = {}

    def _interference_for(self, device: DeviceProfile, round_index: int) -> InterferenceState:
        cfg = self.interference
        if not cfg.enabled or device.category not in cfg.categories:
            return NO_INTERFERENCE
        key = 0 if cfg.frozen else round_index
        rng = self.streams.generator(INTF, key, device.id)
        if rng.random() >= cfg.probability:
            return NO_INTERFERENCE
        co_cpu = float(np.clip(cfg.co_cpu_mean + cfg.co_cpu_std * rng.standard_normal(), 0.0, 1.0))
        co_mem = float(np.clip(cfg.co_mem_mean + cfg.co_mem_std * rng.standard_normal(), 0.0, 1.0))
        return InterferenceState(co_cpu, co_mem)

    def _network_for(self, device: DeviceProfile, round_index: int) -> NetworkSample:
        key = 0 if self.network.frozen else round_index
        rng = self.streams.generator(NET, key, device.id)
        return sample_network(self.network.mean, self.network.stddev, rng)

    def sample_round(self, round_index: int) -> RoundEnvironment:
        fully_frozen = self.interference.frozen and self.network.frozen
        if fully_frozen and 0 in self._frozen_cache:
            cached = self._frozen_cache[0]
            return RoundEnvironment(round_index, cached.interference, cached.network)
        env = RoundEnvironment(
            round_index=round_index,
            interference={d.id: self._interference_for(d, round_index) for d in self.fleet},
            network={d.id: self._network_for(d, round_index) for d in self.fleet},
        )
        if fully_frozen:
            self._frozen_cache[0] = env
        return env
