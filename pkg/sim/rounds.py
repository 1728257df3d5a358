# sim/rounds.py - Timing and energy of a whole fleet for one aggregation round
from dataclasses import dataclass, field
from typing import Dict, Mapping, Sequence, Tuple

from core.domain import DeviceProfile, WorkloadProfile
from sim.energy import EnergyBreakdown, energy_comm, energy_comp, energy_global, energy_idle, energy_local
from sim.timing import TimingBreakdown, comm_time, compute_time, round_time
from sim.variance import RoundEnvironment


@dataclass(frozen=True)
class RoundSimulation:
    t_round: float
    timings: Dict[int, TimingBreakdown]  # participants only
    energies: Dict[int, EnergyBreakdown]  # every fleet device
    e_global: float
    busy_energy: Dict[int, float] = field(default_factory=dict)  # participants, compute only

    @property
    def compute_time(self) -> Dict[int, float]:
        return {i: t.t_busy for i, t in self.timings.items()}

    @property
    def transmit_time(self) -> Dict[int, float]:
        return {i: t.t_tx for i, t in self.timings.items()}

    @property
    def local_energy(self) -> Dict[int, float]:
        return {i: e.e_local for i, e in self.energies.items()}


def participant_latencies(
    fleet: Sequence[DeviceProfile],
    participants: Sequence[int],
    assignments: Mapping[int, Tuple[int, int]],
    workload: WorkloadProfile,
    shard_sizes: Mapping[int, int],
    env: RoundEnvironment,
) -> Dict[int, Tuple[float, float]]:
    """(compute seconds, transmit seconds) per participant"""
    by_id = {d.id: d for d in fleet}
    result = {}
    for device_id in sorted(participants):
        device = by_id[device_id]
        B, E = assignments[device_id]
        t_busy = compute_time(device, workload, shard_sizes[device_id], B, E, env.interference[device_id])
        t_tx = comm_time(workload.payload_bits, env.network[device_id])
        result[device_id] = (t_busy, t_tx)
    return result


def simulate_round(
    fleet: Sequence[DeviceProfile],
    participants: Sequence[int],
    assignments: Mapping[int, Tuple[int, int]],
    workload: WorkloadProfile,
    shard_sizes: Mapping[int, int],
    env: RoundEnvironment,
) -> RoundSimulation:
    """Participants idle-wait at P_idle for the straggler; the rest idle all round"""
    latencies = participant_latencies(fleet, participants, assignments, workload, shard_sizes, env)
    t_round = round_time({i: busy + tx for i, (busy, tx) in latencies.items()})
    timings: Dict[int, TimingBreakdown] = {}
    energies: Dict[int, EnergyBreakdown] = {}
    busy: Dict[int, float] = {}
    for device in fleet:
        if device.id in latencies:
            t_busy, t_tx = latencies[device.id]
            timing = TimingBreakdown(t_busy=t_busy, t_tx=t_tx, t_idle=max(0.0, t_round - (t_busy + t_tx)), t_round=t_round)
            timings[device.id] = timing
            energies[device.id] = energy_local(
                device, True,
                e_comp=energy_comp(device.power_curve, timing),
                e_comm=energy_comm(device, env.network[device.id], t_tx),
            )
            busy[device.id] = energies[device.id].e_comp - device.power_curve.idle_power * timing.t_idle
        else:
            energies[device.id] = energy_local(device, False, e_idle=energy_idle(device.power_curve, t_round))
    e_global = energy_global({i: e.e_local for i, e in energies.items()}, [d.id for d in fleet])
    return RoundSimulation(t_round=t_round, timings=timings, energies=energies, e_global=e_global, busy_energy=busy)
