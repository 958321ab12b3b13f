from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np


class FailureReason(str, Enum):
    TIMEOUT = "timeout"
    QP_INFEASIBLE = "qp_infeasible"
    JOINT_LIMIT = "joint_limit"


@dataclass(frozen=True)
class TrajectoryMetrics:
    """
    Outcome of one goal-reaching run.

    Angles are radians; cumulative_jerk is the integrated translational
    jerk of the end-effector.
    """

    success: bool
    completion_time: float
    final_theta_eps: float
    final_manip: float
    cumulative_jerk: float
    failure_reason: Optional[FailureReason] = None
    final_error: float = float("nan")
    final_angular_error: float = float("nan")
    start_manip: float = float("nan")
    min_manip: float = float("nan")
    min_limit_margin: float = float("nan")
    steps: int = 0

    def __post_init__(self):
        if self.success and self.failure_reason is not None:
            raise ValueError("A successful run cannot carry a failure reason")
        if not self.success and self.failure_reason is None:
            raise ValueError("A failed run must carry a failure reason")
        if self.failure_reason is not None:
            object.__setattr__(self, "failure_reason", FailureReason(self.failure_reason))
        if self.completion_time < 0:
            raise ValueError("Completion time cannot be negative")

    def to_row(self) -> dict:
        return {
            "success": self.success,
            "time_s": self.completion_time,
            "final_theta_eps_deg": float(np.degrees(self.final_theta_eps)),
            "final_manip": self.final_manip,
            "cum_jerk": self.cumulative_jerk,
            "failure_reason": self.failure_reason.value if self.failure_reason else "",
            "final_error_m": self.final_error,
            "start_manip": self.start_manip,
            "min_manip": self.min_manip,
            "min_limit_margin_deg": float(np.degrees(self.min_limit_margin)),
            "steps": self.steps,
        }


def _mean(values: Tuple[float, ...]) -> float:
    return float(np.mean(values)) if values else float("nan")


@dataclass(frozen=True)
class PickPlaceMetrics:
    """Task-level outcome of one pick-and-place run"""

    objects: int
    placements: int
    attempts: int
    grasp_times: Tuple[float, ...] = field(default_factory=tuple)
    pick_place_times: Tuple[float, ...] = field(default_factory=tuple)
    max_idle_gap: float = 0.0
    unrecovered_errors: int = 0
    recovered_errors: int = 0
    incomplete: bool = False
    sim_time: float = 0.0

    def __post_init__(self):
        if self.placements > self.objects:
            raise ValueError("Cannot place more objects than exist")
        if self.attempts < self.placements:
            raise ValueError("Every placement needs at least one grasp attempt")
        if self.unrecovered_errors < 0 or self.recovered_errors < 0:
            raise ValueError("Error counters cannot be negative")
        object.__setattr__(self, "grasp_times", tuple(self.grasp_times))
        object.__setattr__(self, "pick_place_times", tuple(self.pick_place_times))

    @property
    def mean_grasp_time(self) -> float:
        return _mean(self.grasp_times)

    @property
    def mean_pick_place_time(self) -> float:
        return _mean(self.pick_place_times)

    def to_row(self) -> dict:
        return {
            "objects": self.objects,
            "placements": self.placements,
            "attempts": self.attempts,
            "mean_grasp_time_s": self.mean_grasp_time,
            "mean_pick_place_time_s": self.mean_pick_place_time,
            "max_idle_gap_s": self.max_idle_gap,
            "unrecovered_errors": self.unrecovered_errors,
            "recovered_errors": self.recovered_errors,
            "incomplete": self.incomplete,
            "sim_time_s": self.sim_time,
        }
