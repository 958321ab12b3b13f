from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.application.dto.interfaces.response_interface import ResponseInterface
from src.application.use_cases.experiment_use_cases import ScenarioResult, SweepCell
from src.entities.metrics import PickPlaceMetrics


@dataclass
class ScenarioResultResponse(ResponseInterface):
    """DTO for one goal-reaching run; column order of runs.csv"""

    scenario: str
    controller: str
    seed: int
    success: bool
    time_s: float
    final_theta_eps_deg: float
    final_manip: float
    cum_jerk: float
    failure_reason: Optional[str]
    final_error_m: float
    start_manip: float
    min_manip: float
    min_limit_margin_deg: float
    steps: int

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "controller": self.controller,
            "seed": self.seed,
            "success": self.success,
            "time_s": self.time_s,
            "final_theta_eps_deg": self.final_theta_eps_deg,
            "final_manip": self.final_manip,
            "cum_jerk": self.cum_jerk,
            "failure_reason": self.failure_reason,
            "final_error_m": self.final_error_m,
            "start_manip": self.start_manip,
            "min_manip": self.min_manip,
            "min_limit_margin_deg": self.min_limit_margin_deg,
            "steps": self.steps,
        }

    @classmethod
    def from_entity(cls, entity: ScenarioResult) -> "ScenarioResultResponse":
        """Create DTO from a scenario result"""
        row = entity.metrics.to_row()
        return cls(
            scenario=entity.scenario,
            controller=entity.controller,
            seed=entity.seed,
            success=row["success"],
            time_s=row["time_s"],
            final_theta_eps_deg=row["final_theta_eps_deg"],
            final_manip=row["final_manip"],
            cum_jerk=row["cum_jerk"],
            failure_reason=row["failure_reason"],
            final_error_m=row["final_error_m"],
            start_manip=row["start_manip"],
            min_manip=row["min_manip"],
            min_limit_margin_deg=row["min_limit_margin_deg"],
            steps=row["steps"],
        )


@dataclass
class SweepCellResponse(ResponseInterface):
    """DTO for one sweep cell; column order of sweep_<param>.csv"""

    parameter: str
    value: str
    trials: int
    failures: int
    mean_final_theta_eps_deg: float
    mean_final_manip: float
    min_limit_margin_deg: float
    mean_time_s: float

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "value": self.value,
            "trials": self.trials,
            "failures": self.failures,
            "mean_final_theta_eps_deg": self.mean_final_theta_eps_deg,
            "mean_final_manip": self.mean_final_manip,
            "min_limit_margin_deg": self.min_limit_margin_deg,
            "mean_time_s": self.mean_time_s,
        }

    @classmethod
    def from_entity(cls, entity: SweepCell) -> "SweepCellResponse":
        return cls(
            parameter=entity.parameter.value,
            value=entity.value,
            trials=entity.trials,
            failures=entity.failures,
            mean_final_theta_eps_deg=float(np.degrees(entity.mean_final_theta_eps)),
            mean_final_manip=entity.mean_final_manip,
            min_limit_margin_deg=float(np.degrees(entity.min_limit_margin)),
            mean_time_s=entity.to_row()["mean_time_s"],
        )


@dataclass
class PickPlaceMetricsResponse(ResponseInterface):
    """DTO for one pick-and-place run"""

    run: int
    objects: int
    placements: int
    attempts: int
    mean_grasp_time_s: float
    mean_pick_place_time_s: float
    max_idle_gap_s: float
    recovered_errors: int
    unrecovered_errors: int
    incomplete: bool
    sim_time_s: float

    def to_dict(self) -> dict:
        return {
            "run": self.run,
            "objects": self.objects,
            "placements": self.placements,
            "attempts": self.attempts,
            "mean_grasp_time_s": self.mean_grasp_time_s,
            "mean_pick_place_time_s": self.mean_pick_place_time_s,
            "max_idle_gap_s": self.max_idle_gap_s,
            "recovered_errors": self.recovered_errors,
            "unrecovered_errors": self.unrecovered_errors,
            "incomplete": self.incomplete,
            "sim_time_s": self.sim_time_s,
        }

    @classmethod
    def from_entity(cls, entity: PickPlaceMetrics, run: int = 0) -> "PickPlaceMetricsResponse":
        return cls(
            run=run,
            objects=entity.objects,
            placements=entity.placements,
            attempts=entity.attempts,
            mean_grasp_time_s=entity.mean_grasp_time,
            mean_pick_place_time_s=entity.mean_pick_place_time,
            max_idle_gap_s=entity.max_idle_gap,
            recovered_errors=entity.recovered_errors,
            unrecovered_errors=entity.unrecovered_errors,
            incomplete=entity.incomplete,
            sim_time_s=entity.sim_time,
        )
