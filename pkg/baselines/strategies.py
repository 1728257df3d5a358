# baselines/strategies.py - Parameter strategies sharing one round interface
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.domain import GlobalParams, enumerate_actions, validate_params
from core.seeding import POLICY, SeedStreams
from baselines.genetic import GAConfig, ga_adaptive
from rl.controller import FedGPOController, FleetObservation, RoundFeedback
from rl.policy import ControllerConfig, compute_reward

logger = logging.getLogger(__name__)

STRATEGY_NAMES = ("fixed", "fixed-best", "random", "ga", "fedgpo")

_LATTICE = enumerate_actions()


def random_adaptive(rng: np.random.Generator) -> GlobalParams:
    """Uniform draw over the 150 lattice points"""
    return _LATTICE[int(rng.integers(len(_LATTICE)))]


class Strategy:
    """Decides K before participants are sampled, then (B, E) per participant."""

    name = "strategy"

    def choose_k(self, observation: FleetObservation) -> int:
        raise NotImplementedError

    def assign(self, observation: FleetObservation, participants: Sequence[int]) -> Dict[int, Tuple[int, int]]:
        raise NotImplementedError

    def feedback(self, feedback: RoundFeedback, observation: FleetObservation) -> Dict[str, float]:
        return {}

    def finish(self, observation: FleetObservation) -> None:
        pass

    @property
    def converged_round(self) -> Optional[int]:
        return None

    @property
    def overhead(self) -> Dict[int, float]:
        return {}


class _UniformStrategy(Strategy):
    """Same (B, E) for every participant"""

    def __init__(self, fleet_size: int):
        self.fleet_size = fleet_size
        self._current: Optional[GlobalParams] = None

    def params_for(self, round_index: int) -> GlobalParams:
        raise NotImplementedError

    def choose_k(self, observation: FleetObservation) -> int:
        self._current = validate_params(self.params_for(observation.round_index), self.fleet_size)
        return self._current.K

    def assign(self, observation: FleetObservation, participants: Sequence[int]) -> Dict[int, Tuple[int, int]]:
        return {i: (self._current.B, self._current.E) for i in sorted(participants)}


class FixedStrategy(_UniformStrategy):
    name = "fixed"

    def __init__(self, params: GlobalParams, fleet_size: int):
        super().__init__(fleet_size)
        self.params = validate_params(params, fleet_size)

    def params_for(self, round_index: int) -> GlobalParams:
        return self.params


class RandomAdaptiveStrategy(_UniformStrategy):
    name = "random"

    def __init__(self, streams: SeedStreams, fleet_size: int):
        super().__init__(fleet_size)
        self.streams = streams

    def params_for(self, round_index: int) -> GlobalParams:
        return random_adaptive(self.streams.generator(POLICY, round_index))


class GAStrategy(_UniformStrategy):
    """Online GA: each round tries the next individual; a full generation of
    fitnesses breeds the next population. Fitness is the FedGPO reward with
    the fleet-mean local energy."""

    name = "ga"

    def __init__(self, cfg: GAConfig, controller_cfg: ControllerConfig, energy_norm: float,
                 streams: SeedStreams, fleet_size: int):
        super().__init__(fleet_size)
        self.cfg = cfg
        self.controller_cfg = controller_cfg
        self.energy_norm = energy_norm
        self.streams = streams
        self.generation = 0
        seed_rng = streams.generator(POLICY, 0, 2)
        self.population: List[GlobalParams] = [random_adaptive(seed_rng) for _ in range(cfg.population_size)]
        self.fitnesses: List[Optional[float]] = [None] * cfg.population_size
        self._cursor = 0
        self.best_history: List[float] = []

    def params_for(self, round_index: int) -> GlobalParams:
        return self.population[self._cursor]

    def feedback(self, feedback: RoundFeedback, observation: FleetObservation) -> Dict[str, float]:
        mean_local = float(np.mean([feedback.local_energy[i] for i in sorted(feedback.local_energy)]))
        fitness = compute_reward(feedback.e_global, mean_local, feedback.accuracy, feedback.accuracy_prev,
                                 self.controller_cfg, self.energy_norm)
        self.fitnesses[self._cursor] = fitness
        self._cursor += 1
        if self._cursor == self.cfg.population_size:
            self.best_history.append(max(self.fitnesses))
            self.generation += 1
            rng = self.streams.generator(POLICY, self.generation, 2)
            self.population = ga_adaptive(self.population, self.fitnesses, self.cfg, rng)
            self.fitnesses = [None] * self.cfg.population_size
            self._cursor = 0
            logger.debug(f"GA generation {self.generation}: best fitness {self.best_history[-1]:.3f}")
        return {"fitness": fitness}


class FedGPOStrategy(Strategy):
    name = "fedgpo"

    def __init__(self, controller: FedGPOController):
        self.controller = controller
        self._next_k: Optional[int] = None

    def choose_k(self, observation: FleetObservation) -> int:
        if self._next_k is None:
            self._next_k = self.controller.initial_k(observation)
        return self._next_k

    def assign(self, observation: FleetObservation, participants: Sequence[int]) -> Dict[int, Tuple[int, int]]:
        decision = self.controller.controller_round(observation, participants)
        self._next_k = decision.next_k
        return {i: (a.B, a.E) for i, a in decision.local_actions.items()}

    def feedback(self, feedback: RoundFeedback, observation: FleetObservation) -> Dict[str, float]:
        return self.controller.record_feedback(feedback, observation)

    def finish(self, observation: FleetObservation) -> None:
        self.controller.finish(observation)

    @property
    def converged_round(self) -> Optional[int]:
        return self.controller.converged_round

    @property
    def overhead(self) -> Dict[int, float]:
        return dict(self.controller.overhead)
