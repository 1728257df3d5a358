# harness/oracle.py - Brute-force straggler oracle over per-category (B, E) assignments
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.domain import DeviceCategory, DeviceProfile, GlobalParams, WorkloadProfile
from rl.controller import FedGPOController, FleetObservation
from rl.policy import LOCAL_ACTIONS, LocalAction
from sim.rounds import participant_latencies
from sim.variance import RoundEnvironment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleResult:
    assignment: Dict[DeviceCategory, LocalAction]
    latency: float  # seconds of the slowest device
    combinations: int


def assignment_latency(
    fleet: Sequence[DeviceProfile],
    workload: WorkloadProfile,
    shard_sizes: Mapping[int, int],
    env: RoundEnvironment,
    assignments: Mapping[int, Tuple[int, int]],
) -> float:
    """Max compute + transmit latency over the assigned devices"""
    latencies = participant_latencies(fleet, list(assignments), assignments, workload, shard_sizes, env)
    return max(busy + tx for busy, tx in latencies.values())


def uniform_latency(
    fleet: Sequence[DeviceProfile],
    workload: WorkloadProfile,
    shard_sizes: Mapping[int, int],
    env: RoundEnvironment,
    params: GlobalParams,
) -> float:
    """Round latency when every device runs the same (B, E)"""
    return assignment_latency(fleet, workload, shard_sizes, env, {d.id: (params.B, params.E) for d in fleet})


def straggler_oracle(
    fleet: Sequence[DeviceProfile],
    workload: WorkloadProfile,
    shard_sizes: Mapping[int, int],
    env: RoundEnvironment,
) -> OracleResult:
    """Minimum over every per-category (B, E) choice of the slowest device's latency.

    Each category's worst latency is tabulated per action once; the full
    product is then a broadcast max over the categories present. Ties go to
    the first combination in H, M, L and action order.
    """
    categories = [c for c in DeviceCategory if any(d.category == c for d in fleet)]
    worst = []
    for category in categories:
        members = [d for d in fleet if d.category == category]
        row = np.empty(len(LOCAL_ACTIONS))
        for j, action in enumerate(LOCAL_ACTIONS):
            row[j] = assignment_latency(members, workload, shard_sizes, env, {d.id: tuple(action) for d in members})
        worst.append(row)

    grid = worst[0]
    for row in worst[1:]:
        grid = np.maximum(grid[..., np.newaxis], row)
    flat = int(np.argmin(grid))
    indices = np.unravel_index(flat, grid.shape)
    assignment = {c: LOCAL_ACTIONS[int(j)] for c, j in zip(categories, indices)}
    logger.info(f"Straggler oracle: {float(grid.flat[flat]):.4f}s over {grid.size} combinations")
    return OracleResult(assignment, float(grid.flat[flat]), int(grid.size))


def greedy_assignment(
    controller: FedGPOController,
    observation: FleetObservation,
    device_ids: Optional[Sequence[int]] = None,
) -> Dict[int, Tuple[int, int]]:
    """Each device's greedy (B, E) from its table in the observed state"""
    ids = sorted(device_ids) if device_ids is not None else sorted(observation.device_states)
    return {i: tuple(controller.greedy_action(i, observation.device_states[i])) for i in ids}
