from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.application.behaviour_tree.grasp_source import GraspAttempt, ScriptedGraspSource
from src.application.use_cases.motion_control_use_cases import (
    MotionControllerUseCase,
    SequentialBaselineSettings,
)
from src.application.use_cases.simulation_use_cases import step_world
from src.entities.control_command import ControlCommand
from src.entities.kinematic_model import KinematicModel
from src.entities.value_objects.controller_gains import ControllerGains
from src.entities.value_objects.pose import Pose3
from src.entities.world_state import WorldState


@dataclass
class Activation:
    """One leaf activation in world time"""

    behaviour: str
    start: float
    end: float
    moves_robot: bool = False


@dataclass
class TaskStats:
    attempts: int = 0
    placements: int = 0
    recovered_errors: int = 0
    raised_errors: int = 0
    cycle_start: float = 0.0
    grasp_times: List[float] = field(default_factory=list)
    pick_place_times: List[float] = field(default_factory=list)


@dataclass
class Blackboard:
    """
    Shared state of one behaviour-tree executor.

    The goal channel is last-writer-wins; leaves only write during their
    own tick.
    """

    world: WorldState
    model: KinematicModel
    controller: Optional[MotionControllerUseCase] = None
    gains: ControllerGains = field(default_factory=ControllerGains.defaults)
    drive_settings: SequentialBaselineSettings = field(default_factory=SequentialBaselineSettings)
    named_poses: Dict[str, Pose3] = field(default_factory=dict)
    named_configurations: Dict[str, np.ndarray] = field(default_factory=dict)
    goal_pose: Optional[Pose3] = None
    loaded_pose: Optional[Pose3] = None
    seed: int = 0
    grasp_source: Optional[ScriptedGraspSource] = None
    current_grasp: Optional[GraspAttempt] = None
    control_rate: float = 200.0
    tick_rate: float = 20.0
    position_tolerance: float = 0.02
    angular_tolerance: float = float(np.radians(2.0))
    stats: TaskStats = field(default_factory=TaskStats)
    timeline: List[Activation] = field(default_factory=list)
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.control_rate <= 0 or self.tick_rate <= 0:
            raise ValueError("Rates must be positive")
        if self.control_rate < self.tick_rate:
            raise ValueError("control_rate must be at least tick_rate")
        self.rng = np.random.default_rng(self.seed)
        if "ready" not in self.named_configurations:
            self.named_configurations["ready"] = self.model.ready.copy()

    @property
    def dt(self) -> float:
        return 1.0 / self.control_rate

    @property
    def steps_per_tick(self) -> int:
        return max(1, int(round(self.control_rate / self.tick_rate)))

    @property
    def arm_error(self) -> bool:
        return self.world.arm_error

    def advance(self, command: ControlCommand) -> bool:
        """Integrate one control period; True when the arm error is set afterwards"""
        already = self.world.arm_error
        self.world = step_world(self.world, command, self.dt)
        if self.world.arm_error and not already:
            self.stats.raised_errors += 1
        return self.world.arm_error

    def raise_arm_error(self) -> None:
        if not self.world.arm_error:
            self.world = replace(self.world, arm_error=True)
            self.stats.raised_errors += 1

    def end_effector(self) -> Pose3:
        return self.model.fkine(self.world.configuration)

    def record_activation(self, behaviour: str, start: float, end: float, moves_robot: bool) -> None:
        self.timeline.append(Activation(behaviour, start, end, moves_robot))

    def max_idle_gap(self) -> float:
        """Longest stretch of world time with no motion behaviour active"""
        motions = sorted((a.start, a.end) for a in self.timeline if a.moves_robot)
        gap, covered = 0.0, None
        for start, end in motions:
            if covered is not None:
                gap = max(gap, start - covered)
                covered = max(covered, end)
            else:
                covered = end
        return gap

    def planar_pose(self, name: str) -> Tuple[float, float, float]:
        pose = self.named_poses[name]
        heading = float(np.arctan2(pose.rotation[1, 0], pose.rotation[0, 0]))
        return float(pose.translation[0]), float(pose.translation[1]), heading
