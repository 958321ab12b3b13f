from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional

import numpy as np

from src.adapters.di.container import Container
from src.adapters.gateways.tree_file_repository import build_tree_from_file
from src.adapters.presenters.implementations.json_presenter import EXIT_FAILURE, EXIT_OK
from src.app_logs import get_logger
from src.application.behaviour_tree.trees import build_pick_place_tree
from src.application.dto.implementation.metrics_dto import (
    PickPlaceMetricsResponse,
    ScenarioResultResponse,
    SweepCellResponse,
)
from src.application.dto.implementation.run_config_dto import (
    ControllerChoice,
    ExperimentName,
    RunConfig,
)
from src.application.use_cases.experiment_use_cases import (
    ParameterSweepUseCase,
    RunCustomGoalUseCase,
    RunExperimentOneUseCase,
    ScenarioResult,
    SweepParameter,
    TrendCheck,
    check_experiment_one,
    check_goal_runs,
    check_jm_sweep,
    check_keps_sweep,
    summarise,
)
from src.application.use_cases.motion_control_use_cases import ControllerFactory, ControllerKind
from src.application.use_cases.pick_place_use_cases import (
    PickPlaceSettings,
    RunPickPlaceSeriesUseCase,
    check_pick_place,
)
from src.application.use_cases.simulation_use_cases import ScenarioSettings
from src.config.app_config import app_config
from src.entities.kinematic_model import ManipulabilityVariant
from src.entities.value_objects.controller_gains import ControllerGains

logger = get_logger(__name__)

DEFAULT_SWEEP_TRIALS = 1000
DEFAULT_PICK_PLACE_RUNS = 10


@dataclass
class RunOutcome:
    """What the `run` command reports: exit code, verdict lines and the JSON summary"""

    exit_code: int
    verdicts: List[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _controller_kinds(choice: ControllerChoice) -> List[ControllerKind]:
    if choice == ControllerChoice.BOTH:
        return [ControllerKind.HOLISTIC, ControllerKind.SEQUENTIAL]
    return [ControllerKind(choice.value)]


class ExperimentController:
    """Controller for the command-line experiment entry points"""

    def __init__(self, container: Container):
        self.container = container
        self.presenter = container.presenter

    def run(self, data: dict) -> RunOutcome:
        """Validate a run request, execute it and write its artefacts"""
        try:
            config = RunConfig(**data)
            model = self.container.model_repository.load(config.model_path)
            gains = ControllerGains.defaults().with_overrides(**config.gain_overrides())
            factory = ControllerFactory(
                model=model,
                solver_factory=self.container.solver_factory,
                gains=gains,
                jm_variant=config.jm or ManipulabilityVariant.ARM_ONLY,
            )
        except Exception as e:
            return self._error(e)

        run_logger = logger.bind(experiment=config.experiment.value, seed=config.seed)
        run_logger.info("Run started", model=model.name, gains=gains.to_dict())
        try:
            checks, summary = self._execute(config, factory)
        except Exception as e:
            run_logger.exception("Run failed", exc_info=e)
            return self._error(e)

        summary.update(
            {
                "experiment": config.experiment.value,
                "request": config.to_dict(),
                "model": model.name,
                "seed": config.seed,
                "gains": gains.to_dict(),
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks],
            }
        )
        self.container.artifact_writer(config.output_dir).write_json("summary", summary)

        passed = all(check.passed for check in checks)
        verdicts = [str(check) for check in checks]
        verdicts.append(f"{config.experiment.value}: {'PASS' if passed else 'FAIL'}")
        run_logger.info("Run finished", passed=passed)
        return RunOutcome(EXIT_OK if passed else EXIT_FAILURE, verdicts, summary)

    def describe_model(self, path: str) -> dict:
        """Joint table and base kind of a model file"""
        model = self.container.model_repository.load(path)
        return self.presenter.present(
            {
                "name": model.name,
                "n": model.n,
                "base_kind": model.base_kind.value,
                "n_base": model.n_base,
                "n_arm": model.n_arm,
                "joints": [
                    {
                        "name": joint.name,
                        "kind": joint.kind.value,
                        "q_min": float(joint.q_min),
                        "q_max": float(joint.q_max),
                        "qd_max": float(joint.qd_max),
                    }
                    for joint in model.joints
                ],
                "ready": np.asarray(model.ready).tolist(),
            }
        )

    def _error(self, error: Exception) -> RunOutcome:
        presented = self.presenter.present_error(error)
        exit_code = presented["error"]["exit_code"]
        logger.error("Run rejected", error=str(error), exit_code=exit_code)
        return RunOutcome(exit_code, [f"error: {error}"], presented)

    def _threads(self, config: RunConfig) -> int:
        return min(config.threads or app_config.threads, app_config.threads)

    def _scenario_settings(self, config: RunConfig, record: bool) -> ScenarioSettings:
        return ScenarioSettings(
            dt=app_config.control_dt,
            budget=config.budget or app_config.budget,
            record=record,
        )

    def _execute(self, config: RunConfig, factory: ControllerFactory):
        experiment = config.experiment
        if experiment in (ExperimentName.EXP1A, ExperimentName.EXP1B, ExperimentName.EXP1C):
            use_case = RunExperimentOneUseCase(factory, self._scenario_settings(config, record=True))
            results = use_case.execute(experiment.value, _controller_kinds(config.controller), seed=config.seed)
            return self._goal_runs(config, results, check_experiment_one(results, factory.gains.rho_s))
        if experiment == ExperimentName.CUSTOM:
            use_case = RunCustomGoalUseCase(factory, self._scenario_settings(config, record=True))
            results = use_case.execute(_controller_kinds(config.controller), seed=config.seed)
            return self._goal_runs(config, results, check_goal_runs(results, factory.gains.rho_s))
        if config.is_sweep:
            return self._sweep(config, factory)
        return self._pick_place(config, factory)

    def _goal_runs(self, config: RunConfig, results: List[ScenarioResult], checks: List[TrendCheck]):
        writer = self.container.artifact_writer(config.output_dir)
        writer.write_rows("runs", ScenarioResultResponse.rows(results))
        for result in results:
            if result.trajectory is not None:
                writer.write_frame(f"trajectory_{result.scenario}_{result.controller}", result.trajectory)
        summary = {"controllers": {}}
        for controller in sorted({r.controller for r in results}):
            summary["controllers"][controller] = summarise([r.metrics for r in results if r.controller == controller])
        return checks, summary

    def _sweep(self, config: RunConfig, factory: ControllerFactory):
        parameter = SweepParameter.K_EPS if config.experiment == ExperimentName.SWEEP_KEPS else SweepParameter.JM
        use_case = ParameterSweepUseCase(factory, self._scenario_settings(config, record=False), self._threads(config))
        cells = use_case.execute(parameter, config.trials or DEFAULT_SWEEP_TRIALS, seed=config.seed)
        self.container.artifact_writer(config.output_dir).write_rows(
            f"sweep_{parameter.value}", SweepCellResponse.rows(cells)
        )
        checks = check_keps_sweep(cells) if parameter == SweepParameter.K_EPS else check_jm_sweep(cells)
        checks.append(
            TrendCheck(
                "dampers hold the stop distance in every trial",
                all(cell.min_limit_margin >= factory.gains.rho_s - 1e-6 for cell in cells),
                ", ".join(f"{cell.value}={np.degrees(cell.min_limit_margin):.2f} deg" for cell in cells),
            )
        )
        summary = {"cells": {cell.value: summarise(cell.metrics) for cell in cells}}
        return checks, summary

    def _pick_place(self, config: RunConfig, factory: ControllerFactory):
        settings = PickPlaceSettings(tick_rate=app_config.tick_rate, control_rate=app_config.control_rate)
        tree_builder = build_pick_place_tree
        if config.tree_path is not None:
            tree_builder = partial(build_tree_from_file, config.tree_path)
        use_case = RunPickPlaceSeriesUseCase(factory, settings, self._threads(config), tree_builder)
        runs = use_case.execute(config.seed, n_runs=config.trials or DEFAULT_PICK_PLACE_RUNS)
        self.container.artifact_writer(config.output_dir).write_rows(
            "pickplace", [PickPlaceMetricsResponse.from_entity(run, index).to_dict() for index, run in enumerate(runs)]
        )
        summary = {
            "objects": sum(run.objects for run in runs),
            "placements": sum(run.placements for run in runs),
            "attempts": sum(run.attempts for run in runs),
            "mean_grasp_time_s": _pooled_mean([t for run in runs for t in run.grasp_times]),
            "mean_pick_place_time_s": _pooled_mean([t for run in runs for t in run.pick_place_times]),
            "max_idle_gap_s": max(run.max_idle_gap for run in runs),
            "incomplete_runs": sum(run.incomplete for run in runs),
        }
        return check_pick_place(runs), summary


def _pooled_mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None

