# core/domain.py - Shared vocabulary: global parameters, device and workload profiles
import itertools
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

from core.errors import KExceedsFleet, OffLattice

logger = logging.getLogger(__name__)

# Discrete action lattice
B_VALUES: Tuple[int, ...] = (1, 2, 4, 8, 16, 32)
E_VALUES: Tuple[int, ...] = (1, 5, 10, 15, 20)
K_VALUES: Tuple[int, ...] = (1, 5, 10, 15, 20)

LATTICE = {"B": B_VALUES, "E": E_VALUES, "K": K_VALUES}

PAYLOAD_BITS_PER_PARAM = 32


@dataclass(frozen=True, order=True)
class GlobalParams:
    """One round's (B, E, K) tuple"""

    B: int
    E: int
    K: int

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.B, self.E, self.K)

    def __str__(self) -> str:
        return f"({self.B}, {self.E}, {self.K})"


def validate_params(p: GlobalParams, fleet_size: int) -> GlobalParams:
    """Return p unchanged if it sits on the lattice and K fits the fleet"""
    for component in ("B", "E", "K"):
        value = getattr(p, component)
        if value not in LATTICE[component]:
            raise OffLattice(component, value)
    if p.K > fleet_size:
        raise KExceedsFleet(p.K, fleet_size)
    return p


def enumerate_actions() -> List[GlobalParams]:
    """All 150 lattice points, B-major, then E, then K"""
    return [GlobalParams(b, e, k) for b, e, k in itertools.product(B_VALUES, E_VALUES, K_VALUES)]


def neighbor_values(component: str, value: int) -> Tuple[int, ...]:
    """Lattice values adjacent to value for one component"""
    values = LATTICE[component]
    index = values.index(value)
    return tuple(values[i] for i in (index - 1, index + 1) if 0 <= i < len(values))


class DeviceCategory(str, Enum):
    H = "H"
    M = "M"
    L = "L"


class SignalTier(str, Enum):
    REGULAR = "regular"
    BAD = "bad"


@dataclass(frozen=True)
class PowerCurve:
    """Busy power per frequency level plus idle power, in watts"""

    busy_levels: Tuple[Tuple[str, float], ...]
    idle_power: float
    nominal_level: str = "nominal"

    def __post_init__(self):
        if not self.busy_levels:
            raise ValueError("power curve needs at least one busy level")
        powers = [watts for _, watts in self.busy_levels]
        if any(watts <= 0 for watts in powers) or self.idle_power <= 0:
            raise ValueError("all powers must be positive")
        if self.idle_power >= min(powers):
            raise ValueError("idle power must be below every busy power")
        if self.nominal_level not in dict(self.busy_levels):
            raise ValueError(f"nominal level {self.nominal_level!r} missing from busy levels")

    def busy_power(self, level: Optional[str] = None) -> float:
        levels = dict(self.busy_levels)
        return levels[level or self.nominal_level]

    @property
    def nominal_power(self) -> float:
        return self.busy_power(self.nominal_level)


@dataclass(frozen=True)
class DeviceProfile:
    id: int
    category: DeviceCategory
    throughput: float  # GFLOPS
    ram: float  # GB
    power_curve: PowerCurve
    tx_power_table: Tuple[Tuple[str, float], ...]
    cpu_slowdown: float = 1.0
    mem_slowdown: float = 0.5

    def __post_init__(self):
        if self.throughput <= 0 or self.ram <= 0:
            raise ValueError(f"device {self.id}: throughput and ram must be positive")

    def tx_power(self, tier: str) -> Optional[float]:
        return dict(self.tx_power_table).get(str(getattr(tier, "value", tier)))


@dataclass(frozen=True)
class CategoryPreset:
    """Per-category hardware numbers used to stamp out devices"""

    throughput: float
    ram: float
    busy_power: float
    idle_power: float = 0.3
    tx_regular: float = 1.0
    tx_bad: float = 2.5
    cpu_slowdown: float = 1.0
    mem_slowdown: float = 0.5

    def power_curve(self) -> PowerCurve:
        return PowerCurve(busy_levels=(("nominal", self.busy_power),), idle_power=self.idle_power)

    def tx_table(self) -> Tuple[Tuple[str, float], ...]:
        return ((SignalTier.REGULAR.value, self.tx_regular), (SignalTier.BAD.value, self.tx_bad))


# EC2-equivalent GFLOPS/RAM and the CPU peak power of the matching phones
CATEGORY_PRESETS: Dict[DeviceCategory, CategoryPreset] = {
    DeviceCategory.H: CategoryPreset(throughput=153.6, ram=8, busy_power=5.5),
    DeviceCategory.M: CategoryPreset(throughput=80.0, ram=4, busy_power=5.6),
    DeviceCategory.L: CategoryPreset(throughput=52.8, ram=2, busy_power=3.6),
}

DEFAULT_FLEET: Dict[DeviceCategory, int] = {DeviceCategory.H: 30, DeviceCategory.M: 70, DeviceCategory.L: 100}


def preset_with_overrides(category: DeviceCategory, overrides: Optional[Mapping[str, float]] = None) -> CategoryPreset:
    preset = CATEGORY_PRESETS[category]
    if overrides:
        preset = replace(preset, **{k: v for k, v in overrides.items() if v is not None})
    return preset


def build_fleet(
    counts: Mapping[DeviceCategory, int],
    presets: Optional[Mapping[DeviceCategory, CategoryPreset]] = None,
) -> List[DeviceProfile]:
    """Devices numbered 0..N-1 in H, M, L order"""
    presets = presets or CATEGORY_PRESETS
    fleet: List[DeviceProfile] = []
    for category in DeviceCategory:
        preset = presets[category]
        curve = preset.power_curve()
        for _ in range(counts.get(category, 0)):
            fleet.append(DeviceProfile(
                id=len(fleet),
                category=category,
                throughput=preset.throughput,
                ram=preset.ram,
                power_curve=curve,
                tx_power_table=preset.tx_table(),
                cpu_slowdown=preset.cpu_slowdown,
                mem_slowdown=preset.mem_slowdown,
            ))
    logger.debug(f"Built fleet of {len(fleet)} devices: {dict((c.value, counts.get(c, 0)) for c in DeviceCategory)}")
    return fleet


@dataclass(frozen=True)
class WorkloadProfile:
    """NN metadata used for state bins and the FLOP cost model"""

    name: str
    conv_layers: int
    fc_layers: int
    rc_layers: int
    param_count: int
    flops_factor: float = 6.0
    throughput_multiplier: float = 1.0
    step_overhead_samples: float = 0.0  # per optimizer step, in sample passes

    def __post_init__(self):
        if min(self.conv_layers, self.fc_layers, self.rc_layers) < 0:
            raise ValueError("layer counts must be non-negative")
        if self.param_count <= 0 or self.flops_factor <= 0 or self.throughput_multiplier <= 0:
            raise ValueError("param_count, flops_factor and throughput_multiplier must be positive")
        if self.step_overhead_samples < 0:
            raise ValueError("step_overhead_samples must be non-negative")

    @property
    def flops_per_sample_pass(self) -> float:
        return self.flops_factor * self.param_count

    @property
    def payload_bits(self) -> int:
        return PAYLOAD_BITS_PER_PARAM * self.param_count


WORKLOAD_PRESETS: Dict[str, WorkloadProfile] = {
    # 16 features x 10 classes + 10 biases
    "synthetic": WorkloadProfile("synthetic", conv_layers=0, fc_layers=1, rc_layers=0, param_count=170),
    "cnn-mnist": WorkloadProfile("cnn-mnist", conv_layers=2, fc_layers=2, rc_layers=0, param_count=1_663_370),
    "lstm-shakespeare": WorkloadProfile("lstm-shakespeare", conv_layers=0, fc_layers=1, rc_layers=2, param_count=866_578),
    "mobilenet-imagenet": WorkloadProfile("mobilenet-imagenet", conv_layers=27, fc_layers=1, rc_layers=0, param_count=4_231_976),
}
