# sim/energy.py - Compute, communication, idle, local and fleet energy (joules)
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from core.domain import DeviceProfile, PowerCurve
from core.errors import MissingDevice, UnknownTier
from sim.timing import TimingBreakdown
from sim.variance import NetworkSample


@dataclass(frozen=True)
class EnergyBreakdown:
    e_comp: float
    e_comm: float
    e_idle: float
    e_local: float

    def __post_init__(self):
        if min(self.e_comp, self.e_comm, self.e_idle, self.e_local) < 0:
            raise ValueError("energies must be non-negative")

    def as_dict(self):
        return {"e_comp": self.e_comp, "e_comm": self.e_comm, "e_idle": self.e_idle, "e_local": self.e_local}


def energy_comp(pc: PowerCurve, t: TimingBreakdown) -> float:
    """Busy energy summed over frequency levels plus idle-wait energy"""
    if t.busy_split:
        busy = sum(pc.busy_power(level) * seconds for level, seconds in t.busy_split)
    else:
        busy = pc.nominal_power * t.t_busy
    return busy + pc.idle_power * t.t_idle


def energy_comm(device: DeviceProfile, net: NetworkSample, t_tx: float) -> float:
    if t_tx < 0:
        raise ValueError("t_tx must be non-negative")
    watts = device.tx_power(net.signal_tier)
    if watts is None:
        raise UnknownTier(f"device {device.id} has no tx power for tier {net.signal_tier.value}")
    return watts * t_tx


def energy_idle(pc: PowerCurve, t_round: float) -> float:
    if t_round < 0:
        raise ValueError("t_round must be non-negative")
    return pc.idle_power * t_round


def energy_local(device: Optional[DeviceProfile], participant: bool, e_comp: float = 0.0, e_comm: float = 0.0,
                 e_idle: float = 0.0) -> EnergyBreakdown:
    """Participants pay compute + communication; everyone else pays idle"""
    if participant:
        return EnergyBreakdown(e_comp=e_comp, e_comm=e_comm, e_idle=0.0, e_local=e_comp + e_comm)
    return EnergyBreakdown(e_comp=0.0, e_comm=0.0, e_idle=e_idle, e_local=e_idle)


def energy_global(locals_: Mapping[int, float], fleet_ids: Optional[Iterable[int]] = None) -> float:
    """Sum over every fleet device in ascending id order"""
    ids = sorted(fleet_ids) if fleet_ids is not None else sorted(locals_)
    missing = [i for i in ids if i not in locals_]
    if missing:
        raise MissingDevice(f"no local energy for devices {missing[:5]}")
    total = 0.0
    for device_id in ids:
        total += locals_[device_id]
    return total
