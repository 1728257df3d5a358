# rl/controller.py - Per-round FedGPO controller over shared Q-tables
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from core.domain import DeviceProfile, WorkloadProfile
from core.seeding import POLICY, QINIT, SeedStreams
from core.utils import PathLike, write_text_atomic
from fl.datasets import ClientDataset
from rl.policy import (
    GLOBAL_ACTIONS,
    LOCAL_ACTIONS,
    ControllerConfig,
    GlobalAction,
    LocalAction,
    compute_device_reward,
    compute_server_reward,
    local_work,
    q_update,
    select_global_action,
    select_local_action,
    table_converged,
)
from rl.qtable import QTable
from rl.states import StateVector, fleet_state, observe_state
from sim.variance import RoundEnvironment

logger = logging.getLogger(__name__)

SERVER_SCOPE = "server"


@dataclass(frozen=True)
class FleetObservation:
    round_index: int
    device_states: Dict[int, StateVector]
    global_state: StateVector


def observe_fleet(
    workload: WorkloadProfile,
    env: RoundEnvironment,
    partition: Mapping[int, ClientDataset],
    n_classes: int,
) -> FleetObservation:
    states = {
        device_id: observe_state(workload, env.interference[device_id], env.network[device_id], partition[device_id], n_classes)
        for device_id in sorted(partition)
    }
    return FleetObservation(env.round_index, states, fleet_state(workload, states.values()))


@dataclass(frozen=True)
class RoundFeedback:
    """What the round measured, as needed for the reward"""

    round_index: int
    e_global: float
    local_energy: Dict[int, float]  # every fleet device
    accuracy: float
    accuracy_prev: float
    compute_time: Dict[int, float] = field(default_factory=dict)  # participants
    transmit_time: Dict[int, float] = field(default_factory=dict)  # participants
    busy_energy: Dict[int, float] = field(default_factory=dict)  # participants, compute only


@dataclass
class ControllerDecision:
    round_index: int
    local_actions: Dict[int, LocalAction]
    next_k: int
    overhead_s: float = 0.0


@dataclass
class _PendingLocal:
    device_id: int
    state: StateVector
    action: LocalAction
    reward: Optional[float] = None


class FedGPOController:
    """Server-level table picks K from the fleet state; category (or per-device)
    tables pick (B, E) for each participant.

    Local Q updates wait for the next round's observation, which supplies S'.
    All updates run sequentially in device id order. Convergence is tracked
    over the (B, E) tables only; the K reward depends on which devices were
    sampled, so the server row never settles.
    """

    def __init__(
        self,
        fleet: Sequence[DeviceProfile],
        cfg: ControllerConfig,
        streams: SeedStreams,
        energy_norm: Optional[float] = None,
        fleet_size: Optional[int] = None,
        coverage: Optional[Mapping[int, float]] = None,
    ):
        self.fleet = {d.id: d for d in fleet}
        self.cfg = cfg
        self.streams = streams
        self.energy_norm = energy_norm if energy_norm is not None else cfg.energy_norm
        self.fleet_size = fleet_size if fleet_size is not None else len(self.fleet)
        self.coverage = {i: 1.0 for i in self.fleet}
        self.coverage.update(coverage or {})
        self.wait_power = sum(d.power_curve.idle_power for d in self.fleet.values())
        self._init_seed = streams.seed(QINIT)
        self.tables: Dict[str, QTable] = {}
        self.server_table = self._new_table(SERVER_SCOPE, GLOBAL_ACTIONS)
        self._pending: List[_PendingLocal] = []
        self._k_choices: Dict[int, Tuple[StateVector, GlobalAction]] = {}
        self._history: List[Dict[str, float]] = []
        self.converged_round: Optional[int] = None
        self.overhead: Dict[int, float] = {}

    def _new_table(self, scope: str, actions) -> QTable:
        return QTable(actions, scope=scope, init_seed=self._init_seed)

    def scope_for(self, device_id: int) -> str:
        if self.cfg.per_device_tables:
            return f"device-{device_id}"
        return self.fleet[device_id].category.value

    def table_for(self, device_id: int) -> QTable:
        scope = self.scope_for(device_id)
        if scope not in self.tables:
            self.tables[scope] = self._new_table(scope, LOCAL_ACTIONS)
        return self.tables[scope]

    def _allowed_k(self, action: GlobalAction) -> int:
        # K above the fleet size falls back to the whole fleet
        return min(action.K, self.fleet_size)

    def initial_k(self, observation: FleetObservation) -> int:
        """K for the first round, chosen before any participants exist"""
        rng = self.streams.generator(POLICY, observation.round_index, 0)
        action = select_global_action(self.server_table, observation.global_state, rng, self.cfg.epsilon)
        self._k_choices[observation.round_index] = (observation.global_state, action)
        return self._allowed_k(action)

    def _apply_pending(self, observation: FleetObservation) -> None:
        for item in sorted(self._pending, key=lambda p: p.device_id):
            if item.reward is None:
                continue
            s_next = observation.device_states[item.device_id]
            q_update(self.table_for(item.device_id), item.state, item.action, item.reward, s_next, self.cfg)
        self._pending = []

    def controller_round(self, observation: FleetObservation, participants: Sequence[int]) -> ControllerDecision:
        """Apply last round's updates, pick (B, E) per participant and K for the next round"""
        started = time.perf_counter()
        self._apply_pending(observation)
        self._track_convergence(observation.round_index - 1)

        rng = self.streams.generator(POLICY, observation.round_index, 1)
        actions: Dict[int, LocalAction] = {}
        for device_id in sorted(participants):
            state = observation.device_states[device_id]
            action = select_local_action(self.table_for(device_id), state, rng, self.cfg.epsilon)
            actions[device_id] = action
            self._pending.append(_PendingLocal(device_id, state, action))

        k_action = select_global_action(self.server_table, observation.global_state, rng, self.cfg.epsilon)
        self._k_choices[observation.round_index + 1] = (observation.global_state, k_action)

        elapsed = time.perf_counter() - started
        self.overhead[observation.round_index] = self.overhead.get(observation.round_index, 0.0) + elapsed
        return ControllerDecision(observation.round_index, actions, self._allowed_k(k_action), elapsed)

    def record_feedback(self, feedback: RoundFeedback, observation: FleetObservation) -> Dict[str, float]:
        """Score the round; the server update happens now, local ones next round"""
        started = time.perf_counter()
        rewards: Dict[str, float] = {}
        works = []
        for item in sorted(self._pending, key=lambda p: p.device_id):
            work = local_work(item.action.E, self.coverage[item.device_id])
            works.append(work)
            device_id = item.device_id
            item.reward = compute_device_reward(
                work, feedback.busy_energy[device_id], feedback.compute_time[device_id],
                feedback.transmit_time[device_id], self.wait_power, self.cfg,
            )
            rewards[str(item.device_id)] = item.reward

        choice = self._k_choices.pop(feedback.round_index, None)
        # a round of empty shards carries no signal for K
        if choice is not None and sum(works) > 0:
            server_reward = compute_server_reward(works, feedback.e_global, self.cfg, self.energy_norm)
            state, action = choice
            q_update(self.server_table, state, action, server_reward, observation.global_state, self.cfg)
            rewards[SERVER_SCOPE] = server_reward

        elapsed = time.perf_counter() - started
        self.overhead[feedback.round_index] = self.overhead.get(feedback.round_index, 0.0) + elapsed
        return rewards

    def finish(self, observation: FleetObservation) -> None:
        """Flush the last round's local updates"""
        self._apply_pending(observation)
        self._track_convergence(observation.round_index - 1)

    def snapshot(self) -> Dict[str, float]:
        """Max Q per visited state of every (B, E) table"""
        combined: Dict[str, float] = {}
        for scope in sorted(self.tables):
            combined.update({f"{scope}|{k}": v for k, v in self.tables[scope].snapshot().items()})
        return combined

    def _track_convergence(self, round_index: int) -> None:
        snapshot = self.snapshot()
        if round_index < 1 or not snapshot:
            return
        self._history.append(snapshot)
        window = self.cfg.convergence_window
        del self._history[: max(0, len(self._history) - window - 1)]
        if self.converged_round is None and len(self._history) >= 2 and table_converged(
            self._history, self.cfg.convergence_tolerance, window
        ):
            self.converged_round = round_index
            logger.info(f"Q-tables converged at round {round_index}")

    def greedy_action(self, device_id: int, state: StateVector) -> LocalAction:
        return self.table_for(device_id).best_action(state)

    def all_tables(self) -> Dict[str, QTable]:
        return {SERVER_SCOPE: self.server_table, **{s: self.tables[s] for s in sorted(self.tables)}}

    def tables_size_bytes(self) -> int:
        return sum(t.size_bytes() for t in self.all_tables().values())

    def save_tables(self, directory: PathLike) -> None:
        directory = Path(directory)
        for scope, table in self.all_tables().items():
            write_text_atomic(directory / f"{scope}.txt", table.to_text())
        logger.info(f"Saved {len(self.all_tables())} Q-tables to {directory}")
