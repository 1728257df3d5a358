# core/models.py - Pydantic models for the JSON config document
import json
from dataclasses import replace
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Extra, ValidationError, confloat, conint, root_validator, validator

import config
from baselines.genetic import GAConfig
from core.errors import ScenarioInvalid
from core.domain import (
    LATTICE,
    WORKLOAD_PRESETS,
    CategoryPreset,
    DeviceCategory,
    GlobalParams,
    WorkloadProfile,
    preset_with_overrides,
)
from rl.policy import ControllerConfig
from sim.variance import InterferenceSettings, NetworkSettings

Probability = confloat(ge=0, le=1)
ParamsTuple = Tuple[int, int, int]


def _check_on_lattice(value: ParamsTuple) -> ParamsTuple:
    for component, v in zip(("B", "E", "K"), value):
        if v not in LATTICE[component]:
            raise ValueError(f"{component}={v} is not on the {component} lattice {list(LATTICE[component])}")
    return value


def format_validation_error(error: ValidationError) -> str:
    """One `dotted.key: message` clause per failed field"""
    parts = []
    for item in error.errors():
        path = ".".join(str(p) for p in item["loc"] if p != "__root__")
        parts.append(f"{path}: {item['msg']}" if path else item["msg"])
    return "; ".join(parts)


class StrictModel(BaseModel):
    """Base model that rejects unknown keys"""

    class Config:
        extra = Extra.forbid


class CategoryOverride(StrictModel):
    """Model for per-category hardware overrides"""
    throughput: Optional[confloat(gt=0)] = None  # GFLOPS
    ram: Optional[confloat(gt=0)] = None  # GB
    busy_power: Optional[confloat(gt=0)] = None  # W
    idle_power: Optional[confloat(gt=0)] = None
    tx_regular: Optional[confloat(ge=0)] = None
    tx_bad: Optional[confloat(ge=0)] = None
    cpu_slowdown: Optional[confloat(ge=0)] = None
    mem_slowdown: Optional[confloat(ge=0)] = None


class FleetSpec(StrictModel):
    """Model for device counts per performance category"""
    H: conint(ge=0) = 30
    M: conint(ge=0) = 70
    L: conint(ge=0) = 100
    overrides: Dict[DeviceCategory, CategoryOverride] = {}

    @root_validator(skip_on_failure=True)
    def non_empty(cls, values):
        if values["H"] + values["M"] + values["L"] < 1:
            raise ValueError("the fleet needs at least one device")
        return values

    @property
    def size(self) -> int:
        return self.H + self.M + self.L

    def counts(self) -> Dict[DeviceCategory, int]:
        return {DeviceCategory.H: self.H, DeviceCategory.M: self.M, DeviceCategory.L: self.L}

    def presets(self) -> Dict[DeviceCategory, CategoryPreset]:
        return {
            category: preset_with_overrides(
                category, self.overrides[category].dict() if category in self.overrides else None
            )
            for category in DeviceCategory
        }


class WorkloadSpec(StrictModel):
    """Model for the workload metadata; unset fields come from the preset"""
    preset: str = "synthetic"
    conv_layers: Optional[conint(ge=0)] = None
    fc_layers: Optional[conint(ge=0)] = None
    rc_layers: Optional[conint(ge=0)] = None
    param_count: Optional[conint(gt=0)] = None
    flops_factor: Optional[confloat(gt=0)] = None
    throughput_multiplier: Optional[confloat(gt=0)] = None
    step_overhead_samples: Optional[confloat(ge=0)] = None

    @validator("preset")
    def known_preset(cls, v):
        if v not in WORKLOAD_PRESETS:
            raise ValueError(f"unknown workload preset {v!r}, expected one of {sorted(WORKLOAD_PRESETS)}")
        return v

    def profile(self, model_dimension: Optional[int] = None) -> WorkloadProfile:
        """The synthetic preset takes its parameter count from the trained model"""
        base = WORKLOAD_PRESETS[self.preset]
        fields = {k: v for k, v in self.dict(exclude={"preset"}).items() if v is not None}
        if self.preset == "synthetic" and self.param_count is None and model_dimension is not None:
            fields["param_count"] = model_dimension
        return replace(base, **fields)


class DataSpec(StrictModel):
    """Model for the synthetic dataset and its partitioning"""
    mode: Literal["iid", "dirichlet"] = "iid"
    concentration: confloat(gt=0) = config.DIRICHLET_CONCENTRATION
    n_classes: conint(ge=2) = config.DEFAULT_N_CLASSES
    n_samples: conint(ge=2) = config.DEFAULT_N_SAMPLES
    feature_dim: conint(ge=1) = config.DEFAULT_FEATURE_DIM
    separation: confloat(gt=0) = 4.0
    noise: confloat(ge=0) = 1.0
    test_fraction: confloat(gt=0, lt=1) = config.DEFAULT_TEST_FRACTION


class TrainingSpec(StrictModel):
    """Model for local training settings"""
    learning_rate: confloat(ge=0) = config.DEFAULT_LEARNING_RATE
    hidden_units: conint(ge=0) = 0


class InterferenceSpec(StrictModel):
    """Model for co-running application interference"""
    enabled: bool = False
    probability: Probability = 0.3
    co_cpu_mean: Probability = 0.4
    co_cpu_std: confloat(ge=0) = 0.1
    co_mem_mean: Probability = 0.3
    co_mem_std: confloat(ge=0) = 0.1
    frozen: bool = False
    categories: List[DeviceCategory] = list(DeviceCategory)

    def settings(self) -> InterferenceSettings:
        return InterferenceSettings(**{**self.dict(exclude={"categories"}), "categories": frozenset(self.categories)})


class NetworkSpec(StrictModel):
    """Model for bandwidth variance in Mbps"""
    mean: confloat(gt=0) = 80.0
    stddev: confloat(ge=0) = 20.0
    frozen: bool = False

    def settings(self) -> NetworkSettings:
        return NetworkSettings(**self.dict())


class ConvergenceSpec(StrictModel):
    """Model for the training convergence criterion"""
    delta: confloat(ge=0) = config.DEFAULT_CONVERGENCE_DELTA
    window: conint(ge=1) = config.DEFAULT_CONVERGENCE_WINDOW
    loss_tol: confloat(gt=0) = config.DEFAULT_LOSS_TOL
    target_accuracy: Optional[confloat(ge=0, le=100)] = None
    reference_epochs: conint(ge=1) = config.DEFAULT_REFERENCE_EPOCHS
    reference_batch: conint(ge=1) = config.DEFAULT_REFERENCE_BATCH


class ScenarioSpec(StrictModel):
    """Model for everything a run shares regardless of strategy"""
    fleet: FleetSpec = FleetSpec()
    workload: WorkloadSpec = WorkloadSpec()
    data: DataSpec = DataSpec()
    training: TrainingSpec = TrainingSpec()
    interference: InterferenceSpec = InterferenceSpec()
    network: NetworkSpec = NetworkSpec()
    convergence: ConvergenceSpec = ConvergenceSpec()
    seed: conint(ge=0) = config.DEFAULT_SEED
    max_rounds: conint(ge=1) = config.DEFAULT_MAX_ROUNDS
    stop_at_convergence: bool = True


class GASpec(StrictModel):
    """Model for the genetic algorithm baseline"""
    population_size: conint(ge=2) = 10
    mutation_rate: Probability = 0.2
    crossover_rate: Probability = 0.7
    elitism: conint(ge=0) = 1

    @root_validator(skip_on_failure=True)
    def elitism_fits(cls, values):
        if values["elitism"] > values["population_size"]:
            raise ValueError("elitism cannot exceed population_size")
        return values

    def ga_config(self) -> GAConfig:
        return GAConfig(**self.dict())


class StrategySpec(StrictModel):
    """Model for the parameter strategy of a run"""
    name: Literal["fixed", "fixed-best", "random", "ga", "fedgpo"] = "fedgpo"
    params: Optional[ParamsTuple] = None
    budget_rounds: conint(ge=1) = config.DEFAULT_SWEEP_BUDGET
    ga: GASpec = GASpec()

    @validator("params", always=True)
    def params_on_lattice(cls, v, values):
        if v is None:
            if values.get("name") == "fixed":
                raise ValueError("strategy 'fixed' needs params [B, E, K]")
            return v
        return _check_on_lattice(v)

    def global_params(self) -> Optional[GlobalParams]:
        return GlobalParams(*self.params) if self.params is not None else None


class ControllerSpec(StrictModel):
    """Model for the Q-learning controller"""
    gamma: confloat(gt=0, lt=1) = 0.9
    mu: confloat(ge=0, lt=1) = 0.1
    epsilon: Probability = 0.1
    alpha: confloat(gt=0) = 1.0
    beta: confloat(gt=0) = 10.0
    energy_norm: Optional[confloat(gt=0)] = None  # unset: round-1 fleet energy under Fixed (Best)
    work_weight: confloat(ge=0) = 2.0
    per_device_tables: bool = False
    convergence_tolerance: confloat(gt=0) = 1e-3
    convergence_window: conint(ge=1) = 5

    def controller_config(self) -> ControllerConfig:
        return ControllerConfig(**self.dict())


class OutputSpec(StrictModel):
    """Model for report output"""
    directory: str = config.DEFAULT_OUTPUT_DIR
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = config.LOG_LEVEL
    write_csv: bool = True
    write_qtables: bool = True


class SweepSpec(StrictModel):
    """Model for the grid search; no lattice means all 150 points"""
    lattice: Optional[List[ParamsTuple]] = None
    budget_rounds: conint(ge=1) = config.DEFAULT_SWEEP_BUDGET

    @validator("lattice")
    def lattice_on_grid(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("lattice must list at least one point")
        return [_check_on_lattice(point) for point in v]

    def points(self) -> Optional[List[GlobalParams]]:
        return [GlobalParams(*p) for p in self.lattice] if self.lattice is not None else None


class CompareSpec(StrictModel):
    """Model for a multi-strategy comparison"""
    strategies: List[Literal["fixed", "fixed-best", "random", "ga", "fedgpo"]] = ["fixed-best", "fedgpo"]
    anchor: str = "fixed-best"

    @validator("strategies")
    def at_least_two(cls, v):
        if len(v) < 2:
            raise ValueError("compare needs at least two strategies")
        if len(set(v)) != len(v):
            raise ValueError("strategies must be distinct")
        return v


class ConfigDocument(StrictModel):
    """Model for the whole config document"""
    scenario: ScenarioSpec = ScenarioSpec()
    strategy: StrategySpec = StrategySpec()
    controller: ControllerSpec = ControllerSpec()
    output: OutputSpec = OutputSpec()
    sweep: SweepSpec = SweepSpec()
    compare: CompareSpec = CompareSpec()

    @root_validator(skip_on_failure=True)
    def fleet_fits_strategy(cls, values):
        fleet_size = values["scenario"].fleet.size
        strategy = values["strategy"]
        if strategy.name == "fixed":
            if strategy.params[2] > fleet_size:
                raise ValueError(f"strategy.params: K={strategy.params[2]} exceeds fleet size {fleet_size}")
        elif fleet_size < config.MIN_ADAPTIVE_FLEET:
            raise ValueError(
                f"scenario.fleet: strategy {strategy.name!r} needs at least "
                f"{config.MIN_ADAPTIVE_FLEET} devices, got {fleet_size}"
            )
        return values

    def with_strategy(self, name: str, params: Optional[GlobalParams] = None) -> "ConfigDocument":
        """Validated copy running another strategy on the same scenario"""
        data = self.dict()
        data["strategy"]["name"] = name
        data["strategy"]["params"] = params.as_tuple() if params is not None else None
        return ConfigDocument.validated(data)

    @classmethod
    def validated(cls, data: dict) -> "ConfigDocument":
        try:
            return cls.parse_obj(data)
        except ValidationError as e:
            raise ScenarioInvalid(format_validation_error(e)) from e

    def echo(self) -> dict:
        """Fully resolved document as plain JSON types"""
        return json.loads(self.json())
