# harness/experiment.py - Wires data, fleet, environment and a strategy into a full FL run
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from baselines.strategies import (
    FedGPOStrategy,
    FixedStrategy,
    GAStrategy,
    RandomAdaptiveStrategy,
    Strategy,
)
from core.domain import DeviceProfile, GlobalParams, WorkloadProfile, build_fleet
from core.models import ConfigDocument
from core.seeding import DATA, MODEL, PARTITION, SELECT, SHUFFLE, SeedStreams
from fl.datasets import ClientDataset, LabeledDataset, generate_synthetic_dataset, train_test_split
from fl.partition import partition_dirichlet, partition_iid
from fl.training import ModelParams, SoftmaxRegression, aggregate, client_update, evaluate
from harness.metrics import detect_convergence, ppw_from_energy
from harness.oracle import assignment_latency, greedy_assignment
from rl.controller import FedGPOController, FleetObservation, RoundFeedback, observe_fleet
from sim.rounds import simulate_round
from sim.variance import VarianceModel

logger = logging.getLogger(__name__)

# Keyed on the data, training and seed settings; every strategy of a scenario shares one target
_reference_cache: Dict[str, float] = {}


@dataclass
class ExperimentContext:
    """Everything a run shares regardless of strategy"""

    config: ConfigDocument
    streams: SeedStreams
    fleet: List[DeviceProfile]
    train: LabeledDataset
    test: LabeledDataset
    partition: Dict[int, ClientDataset]
    objective: SoftmaxRegression
    workload: WorkloadProfile
    variance: VarianceModel
    target_accuracy: float

    @property
    def shard_sizes(self) -> Dict[int, int]:
        return {i: len(shard) for i, shard in self.partition.items()}

    @property
    def n_classes(self) -> int:
        return self.train.n_classes

    def observe(self, round_index: int) -> FleetObservation:
        return observe_fleet(self.workload, self.variance.sample_round(round_index), self.partition, self.n_classes)


@dataclass
class RoundRecord:
    round_index: int
    k: int
    participants: List[int]
    actions: Dict[int, Tuple[int, int]]
    t_round: float
    energies: Dict[int, Dict[str, float]]  # every fleet device
    e_global: float
    accuracy: float
    loss: float  # training loss on the pooled train set
    test_loss: float
    rewards: Dict[str, float] = field(default_factory=dict)

    @property
    def b_mean(self) -> float:
        return float(np.mean([b for b, _ in self.actions.values()]))

    @property
    def e_mean(self) -> float:
        return float(np.mean([e for _, e in self.actions.values()]))

    def as_dict(self) -> Dict:
        return {
            "kind": "round",
            "round": self.round_index,
            "K": self.k,
            "participants": list(self.participants),
            "actions": {str(i): list(a) for i, a in sorted(self.actions.items())},
            "t_round": self.t_round,
            "energies": {str(i): e for i, e in sorted(self.energies.items())},
            "e_global": self.e_global,
            "accuracy": self.accuracy,
            "loss": self.loss,
            "test_loss": self.test_loss,
            "rewards": dict(self.rewards),
        }


@dataclass
class ExperimentReport:
    strategy: str
    config: Dict  # resolved config echo
    rounds: List[RoundRecord]
    target_accuracy: float
    converged_round: Optional[int]
    resolved_params: Optional[GlobalParams] = None
    controller_converged_round: Optional[int] = None
    greedy_latency: Optional[float] = None  # seconds, the trained greedy assignment over the whole fleet
    overhead: Dict[int, float] = field(default_factory=dict)  # seconds, host dependent
    qtables: Dict[str, str] = field(default_factory=dict)

    @property
    def energy_to_convergence(self) -> float:
        """Fleet energy through the convergence round, or the whole run when unconverged"""
        last = self.converged_round if self.converged_round is not None else len(self.rounds)
        return float(sum(r.e_global for r in self.rounds[:last]))

    @property
    def time_to_convergence(self) -> Optional[float]:
        if self.converged_round is None:
            return None
        return float(sum(r.t_round for r in self.rounds[: self.converged_round]))

    @property
    def ppw(self) -> Optional[float]:
        return ppw_from_energy(self.energy_to_convergence) if self.converged_round is not None else None

    @property
    def final_accuracy(self) -> float:
        return self.rounds[-1].accuracy if self.rounds else 0.0

    @property
    def total_energy(self) -> float:
        return float(sum(r.e_global for r in self.rounds))

    @property
    def qtable_bytes(self) -> int:
        return sum(len(text.encode("utf-8")) for text in self.qtables.values())

    def summary(self) -> Dict:
        return {
            "kind": "summary",
            "strategy": self.strategy,
            "rounds_run": len(self.rounds),
            "target_accuracy": self.target_accuracy,
            "converged_round": self.converged_round,
            "energy_to_convergence": self.energy_to_convergence,
            "time_to_convergence": self.time_to_convergence,
            "ppw": self.ppw,
            "final_accuracy": self.final_accuracy,
            "total_energy": self.total_energy,
            "resolved_params": list(self.resolved_params.as_tuple()) if self.resolved_params else None,
            "controller_converged_round": self.controller_converged_round,
            "greedy_latency": self.greedy_latency,
            "qtable_bytes": self.qtable_bytes,
        }


def sample_participants(streams: SeedStreams, round_index: int, fleet_size: int, k: int) -> List[int]:
    """Uniform K of N without replacement, ascending ids"""
    rng = streams.generator(SELECT, round_index)
    return sorted(int(i) for i in rng.choice(fleet_size, size=k, replace=False))


def reference_accuracy(config: ConfigDocument, train: LabeledDataset, test: LabeledDataset,
                       objective: SoftmaxRegression, streams: SeedStreams) -> float:
    """Test accuracy of centralized minibatch SGD on the pooled training set"""
    scenario = config.scenario
    if scenario.convergence.target_accuracy is not None:
        return float(scenario.convergence.target_accuracy)
    key = json.dumps({
        "data": json.loads(scenario.data.json()),
        "training": json.loads(scenario.training.json()),
        "epochs": scenario.convergence.reference_epochs,
        "batch": scenario.convergence.reference_batch,
        "seed": scenario.seed,
    }, sort_keys=True)
    if key not in _reference_cache:
        pooled = ClientDataset(-1, train.features, train.labels, train.n_classes)
        w = client_update(
            -1, objective.init_params(streams.seed(MODEL)), pooled,
            scenario.convergence.reference_batch, scenario.convergence.reference_epochs,
            scenario.training.learning_rate, objective,
            shuffle=lambda epoch: streams.generator(SHUFFLE, 0, 0, epoch),
        )
        _, accuracy = evaluate(w, test, objective)
        _reference_cache[key] = accuracy
        logger.info(f"Reference centralized accuracy: {accuracy:.2f}%")
    return _reference_cache[key]


def build_context(config: ConfigDocument) -> ExperimentContext:
    scenario = config.scenario
    streams = SeedStreams(scenario.seed)
    fleet = build_fleet(scenario.fleet.counts(), scenario.fleet.presets())

    data = scenario.data
    dataset = generate_synthetic_dataset(
        data.n_classes, data.n_samples, data.feature_dim, streams.seed(DATA),
        separation=data.separation, noise=data.noise,
    )
    train, test = train_test_split(dataset, data.test_fraction, streams.seed(DATA, 1))
    if data.mode == "iid":
        partition = partition_iid(train, len(fleet), streams.seed(PARTITION))
    else:
        partition = partition_dirichlet(train, len(fleet), data.concentration, streams.seed(PARTITION))

    objective = SoftmaxRegression(data.feature_dim, data.n_classes, scenario.training.hidden_units)
    workload = scenario.workload.profile(objective.dimension)
    variance = VarianceModel(fleet, streams, scenario.interference.settings(), scenario.network.settings())
    target = reference_accuracy(config, train, test, objective, streams)
    return ExperimentContext(config, streams, fleet, train, test, partition, objective, workload, variance, target)


def resolve_fixed_best(config: ConfigDocument) -> GlobalParams:
    """The sweep winner; one sweep per scenario and budget per process"""
    from baselines.grid import fixed_best

    return fixed_best(config, config.strategy.budget_rounds, config.sweep.points())


def reference_energy(context: ExperimentContext, params: GlobalParams) -> float:
    """Fleet energy of round 1 under a uniform (B, E, K)"""
    k = min(params.K, len(context.fleet))
    participants = sample_participants(context.streams, 1, len(context.fleet), k)
    sim = simulate_round(
        context.fleet, participants, {i: (params.B, params.E) for i in participants},
        context.workload, context.shard_sizes, context.variance.sample_round(1),
    )
    return sim.e_global


def build_strategy(context: ExperimentContext) -> Tuple[Strategy, Optional[GlobalParams]]:
    config = context.config
    spec = config.strategy
    fleet_size = len(context.fleet)
    if spec.name in ("fixed", "fixed-best"):
        params = spec.global_params()
        if params is None:
            params = resolve_fixed_best(config)
        return FixedStrategy(params, fleet_size), params
    if spec.name == "random":
        return RandomAdaptiveStrategy(context.streams, fleet_size), None

    controller_cfg = config.controller.controller_config()
    energy_norm = controller_cfg.energy_norm
    if energy_norm is None:
        best = resolve_fixed_best(config)
        energy_norm = reference_energy(context, best)
        logger.info(f"Energy normalization from Fixed (Best) {best} at round 1: {energy_norm:.3f} J")
    if spec.name == "ga":
        return GAStrategy(spec.ga.ga_config(), controller_cfg, energy_norm, context.streams, fleet_size), None
    coverage = {i: shard.class_coverage for i, shard in context.partition.items()}
    controller = FedGPOController(context.fleet, controller_cfg, context.streams, energy_norm=energy_norm,
                                  coverage=coverage)
    return FedGPOStrategy(controller), None


def _shuffler(streams: SeedStreams, round_index: int, device_id: int):
    return lambda epoch: streams.generator(SHUFFLE, round_index, device_id, epoch)


def run_experiment(config: ConfigDocument, context: Optional[ExperimentContext] = None) -> ExperimentReport:
    """Rounds until convergence (when stopping early) or max_rounds"""
    context = context or build_context(config)
    scenario = config.scenario
    strategy, resolved = build_strategy(context)
    logger.info(f"Starting {config.strategy.name} run: N={len(context.fleet)}, seed={scenario.seed}, "
                f"target accuracy {context.target_accuracy:.2f}%")

    w: ModelParams = context.objective.init_params(context.streams.seed(MODEL))
    _, accuracy_prev = evaluate(w, context.test, context.objective)
    records: List[RoundRecord] = []
    accuracies: List[float] = []
    losses: List[float] = []
    converged_round: Optional[int] = None
    counts = context.shard_sizes
    observation = context.observe(1)

    for t in range(1, scenario.max_rounds + 1):
        env = context.variance.sample_round(t)
        k = strategy.choose_k(observation)
        participants = sample_participants(context.streams, t, len(context.fleet), k)
        assignments = strategy.assign(observation, participants)

        updates = {
            i: client_update(i, w, context.partition[i], B, E, scenario.training.learning_rate,
                             context.objective, shuffle=_shuffler(context.streams, t, i))
            for i, (B, E) in sorted(assignments.items())
        }
        w = aggregate(updates, {i: counts[i] for i in updates})
        sim = simulate_round(context.fleet, participants, assignments, context.workload, counts, env)
        test_loss, accuracy = evaluate(w, context.test, context.objective)
        train_loss = context.objective.loss(w.weights, context.train.features, context.train.labels)

        next_observation = context.observe(t + 1)
        rewards = strategy.feedback(
            RoundFeedback(t, sim.e_global, sim.local_energy, accuracy, accuracy_prev,
                          compute_time=sim.compute_time, transmit_time=sim.transmit_time,
                          busy_energy=sim.busy_energy),
            next_observation,
        )
        records.append(RoundRecord(
            round_index=t,
            k=k,
            participants=participants,
            actions=dict(assignments),
            t_round=sim.t_round,
            energies={i: e.as_dict() for i, e in sim.energies.items()},
            e_global=sim.e_global,
            accuracy=accuracy,
            loss=train_loss,
            test_loss=test_loss,
            rewards=rewards,
        ))
        logger.debug(f"Round {t}: K={k}, t_round={sim.t_round:.3f}s, E_global={sim.e_global:.3f}J, "
                     f"accuracy={accuracy:.2f}%")
        accuracy_prev = accuracy
        accuracies.append(accuracy)
        losses.append(train_loss)
        observation = next_observation

        if converged_round is None:
            conv = scenario.convergence
            converged_round = detect_convergence(
                accuracies, losses, context.target_accuracy, conv.delta, conv.window, conv.loss_tol
            )
            if converged_round is not None:
                logger.info(f"Training converged at round {converged_round}")
                if scenario.stop_at_convergence:
                    break

    strategy.finish(observation)
    if converged_round is None:
        logger.warning(f"No convergence within {scenario.max_rounds} rounds")

    qtables: Dict[str, str] = {}
    greedy_latency: Optional[float] = None
    if isinstance(strategy, FedGPOStrategy):
        qtables = {scope: table.to_text() for scope, table in strategy.controller.all_tables().items()}
        env = context.variance.sample_round(observation.round_index)
        greedy = greedy_assignment(strategy.controller, observation)
        greedy_latency = assignment_latency(context.fleet, context.workload, counts, env, greedy)
        logger.info(f"Greedy assignment latency: {greedy_latency:.4f}s")

    return ExperimentReport(
        strategy=config.strategy.name,
        config=config.echo(),
        rounds=records,
        target_accuracy=context.target_accuracy,
        converged_round=converged_round,
        resolved_params=resolved,
        controller_converged_round=strategy.converged_round,
        greedy_latency=greedy_latency,
        overhead=strategy.overhead,
        qtables=qtables,
    )
