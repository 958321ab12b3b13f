"""
Kinematic simulation use cases.

In Clean Architecture:
- These use cases are part of the Application Business Rules layer
- They integrate controller commands into the world state
- They turn a closed-loop run into TrajectoryMetrics
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.app_logs import get_logger
from src.application.exceptions import (
    ControllerFailureException,
    ExperimentConfigurationException,
    TrajectoryException,
)
from src.application.use_cases.motion_control_use_cases import (
    MotionControllerUseCase,
    base_angle,
    pose_error,
    wrap_angle,
)
from src.entities.control_command import ControlCommand
from src.entities.kinematic_model import Configuration, KinematicModel
from src.entities.metrics import FailureReason, TrajectoryMetrics
from src.entities.value_objects.pose import Pose3, rotation_log
from src.entities.world_state import WorldState

logger = get_logger(__name__)

DEFAULT_DT = 1.0 / 200.0
JERK_SETTLE_TIME = 0.5


def step_world(world: WorldState, command: ControlCommand, dt: float = DEFAULT_DT):
    """
    Integrate one command over dt.

    Non-holonomic commands (v, omega) follow the unicycle model;
    omnidirectional commands (v_x, v_y, omega) are base-frame velocities.
    Arm joints are clamped to their limits and a clamp raises arm_error.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    x, y, theta = world.base_pose
    c, s = np.cos(theta), np.sin(theta)
    if len(command.base) == 2:
        v, omega = command.base
        x, y = x + v * c * dt, y + v * s * dt
    else:
        v_x, v_y, omega = command.base
        x, y = x + (v_x * c - v_y * s) * dt, y + (v_x * s + v_y * c) * dt
    theta = wrap_angle(theta + omega * dt)

    if command.qd_arm.shape != world.q_a.shape:
        raise ValueError(
            f"Command has {command.qd_arm.shape[0]} arm rates, world has {world.q_a.shape[0]} joints"
        )
    q_raw = world.q_a + command.qd_arm * dt
    q_a = np.clip(q_raw, world.q_min, world.q_max)
    clamped = bool(np.any(q_a != q_raw))
    if clamped:
        logger.warning(
            "Arm joint clamped at its limit",
            time=round(world.time + dt, 4),
            joints=np.flatnonzero(q_a != q_raw).tolist(),
        )

    return replace(
        world,
        base_pose=np.array([x, y, theta]),
        q_a=q_a,
        time=world.time + dt,
        arm_error=world.arm_error or clamped,
    )


def _translations(trajectory: Union[np.ndarray, Sequence[Pose3]]) -> np.ndarray:
    if isinstance(trajectory, np.ndarray):
        positions = np.asarray(trajectory, dtype=float)
    else:
        positions = np.array([pose.translation for pose in trajectory], dtype=float)
    if positions.ndim != 2 or positions.shape[1] != 3:
        raise TrajectoryException("Trajectory must be a sequence of 3-D positions or poses")
    return positions


def cumulative_jerk(
    trajectory: Union[np.ndarray, Sequence[Pose3]],
    dt: float = DEFAULT_DT,
    settle_time: float = JERK_SETTLE_TIME,
) -> float:
    """
    Integrated translational jerk of an end-effector trajectory.

    Third differences are centred at (k + 1.5) dt; those centred before
    settle_time are ignored.
    """
    if dt <= 0:
        raise TrajectoryException("dt must be positive")
    positions = _translations(trajectory)
    if positions.shape[0] < 4:
        raise TrajectoryException(
            f"Cumulative jerk needs at least 4 samples, got {positions.shape[0]}"
        )
    third = (positions[3:] - 3.0 * positions[2:-1] + 3.0 * positions[1:-2] - positions[:-3]) / dt**3
    centres = (np.arange(third.shape[0]) + 1.5) * dt
    magnitudes = np.linalg.norm(third[centres >= settle_time], axis=1)
    return float(np.sum(magnitudes) * dt)


class TrajectoryRecorder:
    """Per-step samples of a closed-loop run"""

    def __init__(self):
        self._rows: List[dict] = []

    def record(self, world: WorldState, T_e: Pose3, theta_eps: float, error_norm: float, manip: float) -> None:
        row = {
            "t": world.time,
            "x": world.base_pose[0],
            "y": world.base_pose[1],
            "theta": world.base_pose[2],
        }
        row.update({f"q{i + 1}": value for i, value in enumerate(world.q_a)})
        rotvec = rotation_log(T_e.rotation)
        row.update(
            {
                "ee_x": T_e.translation[0],
                "ee_y": T_e.translation[1],
                "ee_z": T_e.translation[2],
                "ee_rx": rotvec[0],
                "ee_ry": rotvec[1],
                "ee_rz": rotvec[2],
                "manip": manip,
                "theta_eps": theta_eps,
                "error_norm": error_norm,
            }
        )
        self._rows.append(row)

    def __len__(self) -> int:
        return len(self._rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self._rows)


@dataclass(frozen=True)
class ScenarioSettings:
    """Closed-loop run parameters; tolerances in m and rad"""

    dt: float = DEFAULT_DT
    budget: float = 30.0
    position_tolerance: float = 0.02
    angular_tolerance: float = float(np.radians(2.0))
    record: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.position_tolerance <= 0 or self.angular_tolerance <= 0:
            raise ValueError("Tolerances must be positive")

    @property
    def max_steps(self) -> int:
        return int(np.ceil(self.budget / self.dt - 1e-9))


class RunGoalScenarioUseCase:
    """
    Drive the robot from a start world to an end-effector goal.

    Failure reasons are recorded in the metrics, never raised.
    """

    def __init__(
        self,
        model: KinematicModel,
        controller: MotionControllerUseCase,
        settings: Optional[ScenarioSettings] = None,
    ):
        self.model = model
        self.controller = controller
        self.settings = settings or ScenarioSettings()

    def execute(self, start: WorldState, goal: Pose3) -> Tuple[TrajectoryMetrics, TrajectoryRecorder]:
        settings = self.settings
        self.controller.reset()
        recorder = TrajectoryRecorder()
        positions: List[np.ndarray] = []

        world = start
        start_manip = self.model.manipulability(world.configuration)
        min_manip, min_margin = start_manip, world.limit_margin()
        failure: Optional[FailureReason] = None
        success = False
        steps = 0

        while True:
            cfg = world.configuration
            T_e = self.model.fkine(cfg)
            error_norm, angular_error = pose_error(T_e, goal)
            manip = self.model.manipulability(cfg)
            min_manip = min(min_manip, manip)
            positions.append(T_e.translation)
            if settings.record:
                recorder.record(world, T_e, base_angle(self.model, cfg), error_norm, manip)

            if error_norm < settings.position_tolerance and angular_error < settings.angular_tolerance:
                success = True
                break
            if steps >= settings.max_steps:
                failure = FailureReason.TIMEOUT
                break
            try:
                command = self.controller.execute(cfg, goal)
            except ControllerFailureException as exc:
                logger.warning("Controller failure ends scenario", time=round(world.time, 4), **exc.diagnostics)
                failure = FailureReason.QP_INFEASIBLE
                break
            world = step_world(world, command, settings.dt)
            steps += 1
            min_margin = min(min_margin, world.limit_margin())
            if world.arm_error:
                failure = FailureReason.JOINT_LIMIT
                break

        final_cfg = world.configuration
        try:
            jerk = cumulative_jerk(np.vstack(positions), settings.dt)
        except TrajectoryException:
            jerk = 0.0
        final_T_e = self.model.fkine(final_cfg)
        final_error, final_angular = pose_error(final_T_e, goal)
        metrics = TrajectoryMetrics(
            success=success,
            completion_time=world.time - start.time,
            final_theta_eps=base_angle(self.model, final_cfg),
            final_manip=self.model.manipulability(final_cfg),
            cumulative_jerk=jerk,
            failure_reason=failure,
            final_error=final_error,
            final_angular_error=final_angular,
            start_manip=start_manip,
            min_manip=min_manip,
            min_limit_margin=min_margin,
            steps=steps,
        )
        logger.debug(
            "Scenario finished",
            controller=self.controller.name,
            success=success,
            time=round(metrics.completion_time, 3),
            reason=failure.value if failure else "",
        )
        return metrics, recorder


def sample_goal_configuration(
    rng: np.random.Generator,
    model: KinematicModel,
    radius: float = 4.0,
    margin: float = float(np.radians(5.0)),
    min_height: float = 0.05,
    max_draws: int = 10000,
) -> Tuple[Pose3, Configuration]:
    """
    Reachable goal built from a sampled robot configuration.

    The base is uniform in the disc, the arm uniform within its limits
    shrunk by `margin`; samples whose end-effector leaves the disc or drops
    below `min_height` are rejected, at most `max_draws` times.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if max_draws < 1:
        raise ValueError("max_draws must be at least 1")
    for _ in range(max_draws):
        r = radius * np.sqrt(rng.uniform())
        phi = rng.uniform(-np.pi, np.pi)
        heading = rng.uniform(-np.pi, np.pi)
        q_a = model.random_configuration(rng, margin)
        cfg = Configuration.create(r * np.cos(phi), r * np.sin(phi), heading, q_a)
        pose = model.fkine(cfg)
        if np.hypot(pose.translation[0], pose.translation[1]) <= radius and pose.translation[2] >= min_height:
            return pose, cfg
    raise ExperimentConfigurationException(
        f"No reachable goal within radius {radius} m after {max_draws} draws"
    )


def sample_valid_goal(rng: np.random.Generator, radius: float, model: KinematicModel) -> Pose3:
    pose, _ = sample_goal_configuration(rng, model, radius)
    return pose
