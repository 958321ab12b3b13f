"""
Experiment use cases: goal-reaching scenarios, parameter sweeps and trend checks.

In Clean Architecture:
- These use cases are part of the Application Business Rules layer
- They orchestrate the simulation use cases and aggregate their metrics
- They never touch files; presenters write the artefacts
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.app_logs import get_logger
from src.application.exceptions import ExperimentConfigurationException
from src.application.use_cases.motion_control_use_cases import ControllerFactory, ControllerKind
from src.application.use_cases.simulation_use_cases import (
    RunGoalScenarioUseCase,
    ScenarioSettings,
    sample_goal_configuration,
)
from src.entities.kinematic_model import KinematicModel, ManipulabilityVariant
from src.entities.metrics import TrajectoryMetrics
from src.entities.value_objects.pose import Pose3
from src.entities.world_state import WorldState

logger = get_logger(__name__)

# World-frame offsets applied to the start end-effector pose.
EXPERIMENT_ONE_OFFSETS: Dict[str, Tuple[float, float, float]] = {
    "exp1a": (4.0, 0.0, 0.0),
    "exp1b": (0.0, 4.0, 0.0),
    "exp1c": (-4.0, 0.0, 0.0),
}

KEPS_VALUES = (0.0, 0.1, 0.5, 1.0)
JM_VALUES = (
    ManipulabilityVariant.ZERO,
    ManipulabilityVariant.WHOLE_PLATFORM,
    ManipulabilityVariant.ARM_ONLY,
)


class SweepParameter(str, Enum):
    K_EPS = "keps"
    JM = "jm"


@dataclass(frozen=True)
class ScenarioResult:
    scenario: str
    controller: str
    metrics: TrajectoryMetrics
    seed: int = 0
    trajectory: Optional[pd.DataFrame] = field(default=None, compare=False)

    def to_row(self) -> dict:
        return {"scenario": self.scenario, "controller": self.controller, "seed": self.seed, **self.metrics.to_row()}


@dataclass(frozen=True)
class TrendCheck:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def experiment_one_goal(model: KinematicModel, scenario: str, start: WorldState) -> Pose3:
    if scenario not in EXPERIMENT_ONE_OFFSETS:
        raise ExperimentConfigurationException(f"Unknown goal scenario: {scenario}")
    start_pose = model.fkine(start.configuration)
    return Pose3.trans(*EXPERIMENT_ONE_OFFSETS[scenario]) @ start_pose


class RunExperimentOneUseCase:
    """Fixed-goal runs from the ready pose, one per requested controller"""

    def __init__(self, factory: ControllerFactory, settings: Optional[ScenarioSettings] = None):
        self.factory = factory
        self.settings = settings or ScenarioSettings()

    def execute(
        self,
        scenario: str,
        controllers: Sequence[ControllerKind],
        start: Optional[WorldState] = None,
        seed: int = 0,
    ) -> List[ScenarioResult]:
        model = self.factory.model
        start = start or WorldState.create(model)
        goal = experiment_one_goal(model, scenario, start)
        return self.execute_goal(scenario, goal, controllers, start, seed)

    def execute_goal(
        self,
        scenario: str,
        goal: Pose3,
        controllers: Sequence[ControllerKind],
        start: WorldState,
        seed: int = 0,
    ) -> List[ScenarioResult]:
        results = []
        for kind in controllers:
            controller = self.factory.create(kind)
            logger.info("Scenario started", scenario=scenario, controller=controller.name, seed=seed)
            metrics, recorder = RunGoalScenarioUseCase(self.factory.model, controller, self.settings).execute(
                start, goal
            )
            logger.info(
                "Scenario finished",
                scenario=scenario,
                controller=controller.name,
                success=metrics.success,
                time=round(metrics.completion_time, 3),
                jerk=round(metrics.cumulative_jerk, 4),
                reason=metrics.failure_reason.value if metrics.failure_reason else "",
            )
            trajectory = recorder.to_frame() if self.settings.record else None
            results.append(ScenarioResult(scenario, controller.name, metrics, seed, trajectory))
        return results


class RunCustomGoalUseCase:
    """One seeded random reachable goal, run with each requested controller"""

    def __init__(self, factory: ControllerFactory, settings: Optional[ScenarioSettings] = None, radius: float = 4.0):
        self.experiment = RunExperimentOneUseCase(factory, settings)
        self.radius = radius

    def execute(self, controllers: Sequence[ControllerKind], seed: int = 0) -> List[ScenarioResult]:
        model = self.experiment.factory.model
        goal, _ = sample_goal_configuration(np.random.default_rng(seed), model, self.radius)
        return self.experiment.execute_goal("custom", goal, controllers, WorldState.create(model), seed)


@dataclass(frozen=True)
class TrialSpec:
    """Everything a worker process needs to run one sweep trial"""

    index: int
    seed: int
    radius: float
    factory: ControllerFactory
    settings: ScenarioSettings


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Goal stream of one trial; identical across sweep cells"""
    return np.random.default_rng([seed, index])


def run_trial(spec: TrialSpec) -> Tuple[int, TrajectoryMetrics]:
    model = spec.factory.model
    goal, _ = sample_goal_configuration(trial_rng(spec.seed, spec.index), model, spec.radius)
    controller = spec.factory.create(ControllerKind.HOLISTIC)
    metrics, _ = RunGoalScenarioUseCase(model, controller, spec.settings).execute(WorldState.create(model), goal)
    return spec.index, metrics


@dataclass(frozen=True)
class SweepCell:
    parameter: SweepParameter
    value: str
    metrics: Tuple[TrajectoryMetrics, ...]

    @property
    def trials(self) -> int:
        return len(self.metrics)

    @property
    def failures(self) -> int:
        return sum(not m.success for m in self.metrics)

    @property
    def mean_final_theta_eps(self) -> float:
        return float(np.mean([abs(m.final_theta_eps) for m in self.metrics]))

    @property
    def mean_final_manip(self) -> float:
        return float(np.mean([m.final_manip for m in self.metrics]))

    @property
    def min_limit_margin(self) -> float:
        return float(np.min([m.min_limit_margin for m in self.metrics]))

    def to_row(self) -> dict:
        successes = [m.completion_time for m in self.metrics if m.success]
        return {
            "parameter": self.parameter.value,
            "value": self.value,
            "trials": self.trials,
            "failures": self.failures,
            "mean_final_theta_eps_deg": float(np.degrees(self.mean_final_theta_eps)),
            "mean_final_manip": self.mean_final_manip,
            "mean_time_s": float(np.mean(successes)) if successes else float("nan"),
        }


class ParameterSweepUseCase:
    """
    Runs the same seeded random goals once per parameter value.

    Trials are independent and run on a process pool; results are
    re-ordered by trial index so output does not depend on scheduling.
    """

    def __init__(
        self,
        factory: ControllerFactory,
        settings: Optional[ScenarioSettings] = None,
        threads: int = 1,
        radius: float = 4.0,
    ):
        if threads < 1:
            raise ExperimentConfigurationException("threads must be >= 1")
        self.factory = factory
        self.settings = settings or ScenarioSettings()
        self.threads = threads
        self.radius = radius

    def execute(
        self,
        parameter: SweepParameter,
        trials: int,
        seed: int = 0,
        values: Optional[Sequence] = None,
    ) -> List[SweepCell]:
        if trials < 1:
            raise ExperimentConfigurationException("trials must be >= 1")
        parameter = SweepParameter(parameter)
        if values is None:
            values = KEPS_VALUES if parameter == SweepParameter.K_EPS else JM_VALUES
        cells = []
        for value in values:
            factory, label = self._factory_for(parameter, value)
            specs = [TrialSpec(index, seed, self.radius, factory, self.settings) for index in range(trials)]
            metrics = self._run(specs)
            cell = SweepCell(parameter, label, tuple(metrics))
            logger.info(
                "Sweep cell finished",
                parameter=parameter.value,
                value=label,
                trials=cell.trials,
                failures=cell.failures,
                mean_final_theta_eps_deg=round(float(np.degrees(cell.mean_final_theta_eps)), 3),
                mean_final_manip=round(cell.mean_final_manip, 5),
            )
            cells.append(cell)
        return cells

    def _factory_for(self, parameter: SweepParameter, value) -> Tuple[ControllerFactory, str]:
        if parameter == SweepParameter.K_EPS:
            return self.factory.with_gains(self.factory.gains.with_overrides(k_eps=float(value))), f"{float(value):g}"
        variant = ManipulabilityVariant.create(value) if isinstance(value, str) else ManipulabilityVariant(value)
        return self.factory.with_variant(variant), variant.value

    def _run(self, specs: List[TrialSpec]) -> List[TrajectoryMetrics]:
        if self.threads == 1:
            results = [run_trial(spec) for spec in specs]
        else:
            chunksize = max(1, len(specs) // (self.threads * 4))
            with ProcessPoolExecutor(max_workers=self.threads) as executor:
                results = list(executor.map(run_trial, specs, chunksize=chunksize))
        return [metrics for _, metrics in sorted(results, key=lambda item: item[0])]


def check_goal_runs(results: Sequence[ScenarioResult], rho_s: float) -> List[TrendCheck]:
    """Every run succeeds and never gets closer to a joint limit than the stop distance"""
    checks = []
    for result in results:
        metrics = result.metrics
        checks.append(
            TrendCheck(
                f"{result.scenario} {result.controller} succeeds",
                metrics.success,
                metrics.failure_reason.value if metrics.failure_reason else f"{metrics.completion_time:.2f} s",
            )
        )
        checks.append(
            TrendCheck(
                f"{result.scenario} {result.controller} respects joint stop distance",
                metrics.min_limit_margin >= rho_s - 1e-6,
                f"min margin {np.degrees(metrics.min_limit_margin):.2f} deg",
            )
        )
    return checks


def check_experiment_one(
    results: Sequence[ScenarioResult],
    rho_s: float,
    time_band: Tuple[float, float] = (2.5, 12.0),
    slowdown: float = 1.7,
    manip_floor: float = 0.9,
) -> List[TrendCheck]:
    """
    Per-scenario acceptance checks.

    Every run succeeds within the joint stop distance. The holistic run
    finishes inside time_band and keeps arm manipulability at or above
    manip_floor times its start value. Against the sequential baseline it
    must be at least `slowdown` times faster and strictly smoother.
    """
    checks = []
    by_key = {(r.scenario, r.controller): r.metrics for r in results}
    for scenario in sorted({r.scenario for r in results}):
        holistic = by_key.get((scenario, ControllerKind.HOLISTIC.value))
        sequential = by_key.get((scenario, ControllerKind.SEQUENTIAL.value))
        checks.extend(check_goal_runs([r for r in results if r.scenario == scenario], rho_s))
        if holistic is not None and scenario in EXPERIMENT_ONE_OFFSETS:
            low, high = time_band
            checks.append(
                TrendCheck(
                    f"{scenario} holistic time in band",
                    holistic.success and low <= holistic.completion_time <= high,
                    f"{holistic.completion_time:.2f} s in [{low}, {high}]",
                )
            )
            floor = manip_floor * holistic.start_manip
            checks.append(
                TrendCheck(
                    f"{scenario} holistic manipulability stays above {manip_floor}x start",
                    bool(holistic.min_manip >= floor),
                    f"min {holistic.min_manip:.4f} vs floor {floor:.4f}",
                )
            )
        if holistic is not None and sequential is not None:
            ratio = sequential.completion_time / max(holistic.completion_time, 1e-9)
            checks.append(
                TrendCheck(
                    f"{scenario} sequential at least {slowdown}x slower",
                    holistic.success and sequential.success and ratio >= slowdown,
                    f"ratio {ratio:.2f}",
                )
            )
            checks.append(
                TrendCheck(
                    f"{scenario} holistic smoother than sequential",
                    holistic.cumulative_jerk < sequential.cumulative_jerk,
                    f"{holistic.cumulative_jerk:.3f} < {sequential.cumulative_jerk:.3f}",
                )
            )
    return checks


def check_keps_sweep(cells: Sequence[SweepCell], max_mean_theta_deg: float = 10.0) -> List[TrendCheck]:
    by_value = {float(cell.value): cell for cell in cells}
    means = [np.degrees(by_value[v].mean_final_theta_eps) for v in sorted(by_value)]
    checks = [
        TrendCheck(
            "mean final theta_eps decreases with k_eps",
            all(a > b for a, b in zip(means, means[1:])),
            ", ".join(f"{m:.2f}" for m in means),
        )
    ]
    if 0.1 in by_value and 1.0 in by_value:
        low, high = by_value[0.1].failures, by_value[1.0].failures
        checks.append(TrendCheck("k_eps = 1.0 fails more than k_eps = 0.1", high > low, f"{high} vs {low}"))
    if 0.5 in by_value:
        value = np.degrees(by_value[0.5].mean_final_theta_eps)
        checks.append(
            TrendCheck(
                f"mean final theta_eps at k_eps = 0.5 below {max_mean_theta_deg} deg",
                value < max_mean_theta_deg,
                f"{value:.2f} deg",
            )
        )
    return checks


def check_jm_sweep(cells: Sequence[SweepCell], manip_ratio: float = 2.0) -> List[TrendCheck]:
    by_value = {cell.value: cell for cell in cells}
    arm = by_value.get(ManipulabilityVariant.ARM_ONLY.value)
    if arm is None:
        return [TrendCheck("arm-only variant present", False, "no arm_only cell")]
    others = [cell for key, cell in by_value.items() if key != arm.value]
    checks = [
        TrendCheck(
            "arm-only variant has the fewest failures",
            all(arm.failures < cell.failures for cell in others),
            ", ".join(f"{cell.value}={cell.failures}" for cell in cells),
        ),
        TrendCheck(
            "arm-only variant has the highest final manipulability",
            all(arm.mean_final_manip > cell.mean_final_manip for cell in others),
            ", ".join(f"{cell.value}={cell.mean_final_manip:.4f}" for cell in cells),
        ),
    ]
    zero = by_value.get(ManipulabilityVariant.ZERO.value)
    if zero is not None:
        checks.append(
            TrendCheck(
                f"arm-only final manipulability at least {manip_ratio}x the zero variant",
                arm.mean_final_manip >= manip_ratio * zero.mean_final_manip,
                f"{arm.mean_final_manip:.4f} vs {zero.mean_final_manip:.4f}",
            )
        )
    return checks


def summarise(metrics: Sequence[TrajectoryMetrics]) -> dict:
    """Means and 5/50/95 percentiles of time, jerk, theta_eps and manipulability"""
    if not metrics:
        return {}
    frame = pd.DataFrame(
        {
            "time_s": [m.completion_time for m in metrics],
            "cum_jerk": [m.cumulative_jerk for m in metrics],
            "final_theta_eps_deg": [abs(np.degrees(m.final_theta_eps)) for m in metrics],
            "final_manip": [m.final_manip for m in metrics],
        }
    )
    summary = {"runs": len(metrics), "failures": int(sum(not m.success for m in metrics))}
    for column in frame.columns:
        values = frame[column]
        summary[column] = {
            "mean": float(values.mean()),
            "p5": float(values.quantile(0.05)),
            "p50": float(values.quantile(0.5)),
            "p95": float(values.quantile(0.95)),
        }
    return summary
