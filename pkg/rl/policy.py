# rl/policy.py - Epsilon-greedy selection, reward, Q update and table convergence
import itertools
from dataclasses import dataclass
from typing import Hashable, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from core.domain import B_VALUES, E_VALUES, K_VALUES
from rl.qtable import QTable


class LocalAction(NamedTuple):
    B: int
    E: int


class GlobalAction(NamedTuple):
    K: int


LOCAL_ACTIONS: List[LocalAction] = [LocalAction(b, e) for b, e in itertools.product(B_VALUES, E_VALUES)]
GLOBAL_ACTIONS: List[GlobalAction] = [GlobalAction(k) for k in K_VALUES]


def parse_local_action(text: str) -> LocalAction:
    b, e = text.split(",")
    return LocalAction(int(b), int(e))


@dataclass(frozen=True)
class ControllerConfig:
    gamma: float = 0.9  # learning rate
    mu: float = 0.1  # discount factor
    epsilon: float = 0.1  # exploration probability
    alpha: float = 1.0
    beta: float = 10.0
    work_weight: float = 2.0  # value of a full-coverage E_max update, in fleet idle energy per transmit time
    energy_norm: Optional[float] = None  # joules; round-1 fleet energy under Fixed (Best) when unset
    per_device_tables: bool = False
    convergence_tolerance: float = 1e-3
    convergence_window: int = 5

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0 <= self.mu < 1:
            raise ValueError(f"mu must be in [0, 1), got {self.mu}")
        if not 0 <= self.epsilon <= 1:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.work_weight < 0:
            raise ValueError(f"work_weight must be non-negative, got {self.work_weight}")
        if self.energy_norm is not None and self.energy_norm <= 0:
            raise ValueError("energy_norm must be positive")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be at least 1")


def select_action(table: QTable, state, epsilon: float, rng: np.random.Generator) -> Hashable:
    """Uniform random action with probability epsilon, else the row argmax"""
    explore = rng.random() < epsilon
    if explore:
        return table.actions[int(rng.integers(len(table.actions)))]
    return table.best_action(state)


def select_local_action(table: QTable, state, rng: np.random.Generator, epsilon: float) -> LocalAction:
    return select_action(table, state, epsilon, rng)


def select_global_action(server_table: QTable, s_global, rng: np.random.Generator, epsilon: float) -> GlobalAction:
    return select_action(server_table, s_global, epsilon, rng)


def compute_reward(e_global: float, e_local: float, acc: float, acc_prev: float, cfg: ControllerConfig,
                   energy_norm: Optional[float] = None) -> float:
    """No accuracy gain: acc - 100. Otherwise trade normalized energy against accuracy."""
    if acc - acc_prev <= 0:
        return acc - 100.0
    norm = energy_norm if energy_norm is not None else cfg.energy_norm
    if norm is None:
        raise ValueError("energy_norm is required to score an accuracy gain")
    return -(e_global / norm) - (e_local / norm) + cfg.alpha * acc + cfg.beta * (acc - acc_prev)


def local_work(E: int, coverage: float) -> float:
    """Share of a full-coverage E_max update that (B, E) reflects on a shard"""
    return coverage * E / max(E_VALUES)


def compute_device_reward(work: float, e_busy: float, t_busy: float, t_tx: float, wait_power: float,
                          cfg: ControllerConfig) -> float:
    """Reward of one participant's (B, E) from its own measurements only.

    Local work is charged the device's busy energy plus the fleet's idle draw
    for as long as the device computes, in units of the fleet idle energy
    spent while it transmits. A slow device thus pays for the wait it causes.
    """
    if t_tx <= 0 or wait_power <= 0:
        raise ValueError("t_tx and wait_power must be positive")
    return cfg.work_weight * work - (e_busy + wait_power * t_busy) / (wait_power * t_tx)


def compute_server_reward(works: Sequence[float], e_global: float, cfg: ControllerConfig,
                          energy_norm: Optional[float] = None) -> float:
    """Reward of K: normalized fleet energy per square root of the round's reflected work.

    The fleet's idle draw is paid whatever K is, so the best K balances that
    fixed cost against what each extra participant adds.
    """
    norm = energy_norm if energy_norm is not None else cfg.energy_norm
    if norm is None:
        raise ValueError("energy_norm is required to score K")
    total = sum(works)
    if total <= 0:
        raise ValueError("the round reflected no work")
    return -(e_global / norm) / float(np.sqrt(total))


def q_update(table: QTable, s, a, r: float, s_next, cfg: ControllerConfig) -> QTable:
    """Q(S,A) <- Q(S,A) + gamma * [R + mu * max Q(S',.) - Q(S,A)]"""
    q = table.value(s, a)
    target = r + cfg.mu * table.max_value(s_next)
    table.set(s, a, q + cfg.gamma * (target - q))
    return table


def table_converged(history: Sequence[Mapping[str, float]], tolerance: float = 1e-3, window: int = 5) -> bool:
    """True when max_A Q(S, A) moved less than tolerance for every state
    across each of the last `window` consecutive snapshots.

    A state missing from the earlier snapshot of a pair counts as moved.
    """
    if len(history) < 2:
        raise ValueError("need at least two snapshots")
    if len(history) < window + 1:
        return False
    for before, after in zip(history[-window - 1:-1], history[-window:]):
        for key, value in after.items():
            if key not in before or abs(value - before[key]) >= tolerance:
                return False
    return True
