"""
Motion control use cases.

In Clean Architecture:
- These use cases are part of the Application Business Rules layer
- They turn a goal pose and the current configuration into a velocity command
- They depend on the QP solver only through QPSolverInterface
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from src.adapters.gateways.interfaces.qp_solver_interface import QPSolverInterface
from src.app_logs import get_logger
from src.application.exceptions import ControllerFailureException, DimensionMismatchException
from src.entities.control_command import ControlCommand
from src.entities.kinematic_model import (
    Configuration,
    KinematicModel,
    ManipulabilityVariant,
    manipulability,
)
from src.entities.qp_problem import QPProblem, QPSolution, QPStatus
from src.entities.value_objects.controller_gains import ControllerGains
from src.entities.value_objects.pose import Pose3, Twist, adjoint_rotation, inverse, psi

logger = get_logger(__name__)


def wrap_angle(angle: float) -> float:
    """Wrap to (-pi, pi]"""
    wrapped = float(np.arctan2(np.sin(angle), np.cos(angle)))
    return np.pi if wrapped <= -np.pi else wrapped


def pose_error(T_e: Pose3, T_goal: Pose3) -> Tuple[float, float]:
    """Translational distance (m) and rotation angle (rad) between two poses"""
    delta = inverse(T_e) @ T_goal
    twist = psi(delta)
    return float(np.linalg.norm(T_goal.translation - T_e.translation)), float(
        np.linalg.norm(twist.angular)
    )


def pbs_twist(T_e: Pose3, T_goal: Pose3, beta: float) -> Twist:
    """beta * psi(T_e^-1 T_goal), in the end-effector frame"""
    return psi(inverse(T_e) @ T_goal).scaled(beta)


def cap_linear_speed(nu: Twist, max_speed: float) -> Twist:
    """Scale the linear part down to max_speed; the angular part is untouched"""
    speed = float(np.linalg.norm(nu.linear))
    if speed <= max_speed:
        return nu
    return Twist(linear=nu.linear * (max_speed / speed), angular=nu.angular.copy())


def _bearing(base_to_ee: np.ndarray) -> float:
    x, y = base_to_ee[0, 3], base_to_ee[1, 3]
    if np.hypot(x, y) < 1e-12:
        return 0.0
    angle = float(np.arctan2(y, x))
    return np.pi if angle <= -np.pi else angle


def base_angle(model: KinematicModel, cfg: Configuration) -> float:
    """Planar bearing of the end-effector in the base frame, in (-pi, pi]"""
    return _bearing(model.base_to_end_effector(cfg.q_a))


def _check_configuration(model: KinematicModel, cfg: Configuration) -> None:
    if cfg.q_a.shape != (model.n_arm,):
        raise DimensionMismatchException(
            f"Configuration has {cfg.q_a.shape[0]} arm joints, model {model.name} has {model.n_arm}"
        )


def rrmc_step(model: KinematicModel, cfg: Configuration, nu: Twist) -> np.ndarray:
    """Least-norm joint rates reproducing a base-frame end-effector twist"""
    _check_configuration(model, cfg)
    jacobian, _ = model.base_kinematics(cfg.q_a)
    return np.linalg.pinv(jacobian) @ nu.as_array()


def velocity_dampers(
    model: KinematicModel, q_a: np.ndarray, gains: ControllerGains
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Velocity-damper rows over the n joint columns.

    One row per arm joint and per limit within the influence distance;
    base joints are never damped.
    """
    rows, bounds = [], []
    scale = gains.eta / (gains.rho_i - gains.rho_s)
    for index, (joint, value) in enumerate(zip(model.arm_joints, q_a)):
        column = model.n_base + index
        for sign, distance in ((1.0, joint.q_max - value), (-1.0, value - joint.q_min)):
            if distance <= gains.rho_i:
                row = np.zeros(model.n)
                row[column] = sign
                rows.append(row)
                bounds.append(scale * (distance - gains.rho_s))
    if not rows:
        return np.zeros((0, model.n)), np.zeros(0)
    return np.vstack(rows), np.asarray(bounds)


def build_qp(
    model: KinematicModel,
    cfg: Configuration,
    nu_star: Twist,
    gains: ControllerGains,
    jm_variant: ManipulabilityVariant,
    error_norm: float,
    kinematics: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> QPProblem:
    """
    Assemble the holistic QP over x = (q_dot, slack).

    `nu_star` is expressed in the base frame. `kinematics` may carry a
    (J_base, bTe) pair already computed for `cfg`.
    """
    _check_configuration(model, cfg)
    n = model.n
    jacobian, base_to_ee = kinematics or model.base_kinematics(cfg.q_a)

    inverse_error = gains.lambda_delta_cap if error_norm <= 0 else min(
        1.0 / error_norm, gains.lambda_delta_cap
    )
    weights = np.concatenate(
        (
            np.full(model.n_base, gains.lambda_base * inverse_error),
            np.full(model.n_arm, gains.lambda_arm),
            np.full(6, inverse_error),
        )
    )

    linear = np.zeros(n + 6)
    # Negative gradient: minimising the linear term increases manipulability.
    linear[:n] = -model.manipulability_jacobian(cfg, jm_variant, jacobian=jacobian)
    theta_eps = _bearing(base_to_ee)
    linear[model.rotation_joint_index] += -gains.k_eps * theta_eps

    damper_rows, damper_bounds = velocity_dampers(model, cfg.q_a, gains)
    inequality = np.hstack((damper_rows, np.zeros((damper_rows.shape[0], 6))))

    v_max, w_max = gains.base_vel_limits
    base_limits = np.array([w_max if j.is_rotational else v_max for j in model.joints[: model.n_base]])
    upper = np.concatenate((base_limits, model.qd_max[model.n_base :], gains.slack_bound))

    return QPProblem(
        Q=np.diag(weights),
        C=linear,
        Jeq=np.hstack((jacobian, np.eye(6))),
        nu=nu_star.as_array(),
        A=inequality,
        B=damper_bounds,
        lower=-upper,
        upper=upper,
    )


class MotionControllerUseCase(ABC):
    """
    Base class for motion controllers.

    A controller instance owns its solver workspace and phase state; it is
    driven by one control loop at a time. Model and gains are shared
    read-only.
    """

    name = "controller"

    def __init__(self, model: KinematicModel, gains: Optional[ControllerGains] = None):
        self.model = model
        self.gains = gains or ControllerGains.defaults()

    @abstractmethod
    def execute(self, cfg: Configuration, goal: Pose3) -> ControlCommand:
        """Command for one control period towards the world-frame goal"""
        pass

    def reset(self) -> None:
        """Forget state carried between calls"""
        pass

    def _targets(self, cfg: Configuration, goal: Pose3):
        _check_configuration(self.model, cfg)
        jacobian, base_to_ee = self.model.base_kinematics(cfg.q_a)
        T_e = Pose3.from_matrix(cfg.base_transform.as_matrix() @ base_to_ee)
        error_norm, _ = pose_error(T_e, goal)
        # Desired twist is computed in the end-effector frame; the QP works in the base frame.
        nu_ee = pbs_twist(T_e, goal, self.gains.beta)
        nu_base = Twist.create(adjoint_rotation(base_to_ee[:3, :3]) @ nu_ee.as_array())
        nu_base = cap_linear_speed(nu_base, self.gains.max_linear_speed)
        return jacobian, base_to_ee, nu_base, error_norm


def _solve_or_fail(
    solver: QPSolverInterface,
    problem: QPProblem,
    warm_start: Optional[QPSolution],
    theta_eps: float,
    error_norm: float,
    manip: float,
) -> QPSolution:
    solution = solver.solve(problem, warm_start=warm_start)
    if solution.status in (QPStatus.INFEASIBLE, QPStatus.UNBOUNDED):
        logger.warning(
            "Motion control QP has no solution",
            status=solution.status.value,
            theta_eps=round(theta_eps, 6),
            error_norm=round(error_norm, 6),
            manip=round(manip, 6),
        )
        raise ControllerFailureException(
            f"Motion control QP is {solution.status.value}",
            theta_eps=theta_eps,
            error_norm=error_norm,
            manip=manip,
            solver_status=solution.status.value,
        )
    if solution.status == QPStatus.MAX_ITER:
        logger.warning(
            "Motion control QP not converged, using clipped iterate",
            kkt_residual=solution.kkt_residual,
            error_norm=round(error_norm, 6),
        )
    return solution


def _clip_to_bounds(problem: QPProblem, x: np.ndarray) -> np.ndarray:
    return np.clip(x, problem.lower, problem.upper)


class HolisticControlUseCase(MotionControllerUseCase):
    """
    Holistic reactive controller.

    Base and arm are solved together in one QP each control period. The
    previous solution warm-starts the next solve.
    """

    name = "holistic"

    def __init__(
        self,
        model: KinematicModel,
        solver: QPSolverInterface,
        gains: Optional[ControllerGains] = None,
        jm_variant: ManipulabilityVariant = ManipulabilityVariant.ARM_ONLY,
    ):
        super().__init__(model, gains)
        self.solver = solver
        self.jm_variant = ManipulabilityVariant(jm_variant)
        self._last_solution: Optional[QPSolution] = None

    def reset(self) -> None:
        self._last_solution = None
        self.solver.reset()

    def build(self, cfg: Configuration, goal: Pose3) -> Tuple[QPProblem, dict]:
        """QP for the current configuration and the diagnostics that go with it"""
        jacobian, base_to_ee, nu_base, error_norm = self._targets(cfg, goal)
        problem = build_qp(
            self.model,
            cfg,
            nu_base,
            self.gains,
            self.jm_variant,
            error_norm,
            kinematics=(jacobian, base_to_ee),
        )
        diagnostics = {
            "theta_eps": _bearing(base_to_ee),
            "error_norm": error_norm,
            "manip": manipulability(jacobian[:, self.model.n_base :]),
        }
        return problem, diagnostics

    def execute(self, cfg: Configuration, goal: Pose3) -> ControlCommand:
        problem, diagnostics = self.build(cfg, goal)
        solution = _solve_or_fail(self.solver, problem, self._last_solution, **diagnostics)
        self._last_solution = solution
        x = _clip_to_bounds(problem, solution.x)
        return ControlCommand.from_joint_rates(
            self.model, x[: self.model.n], slack=x[self.model.n :], **diagnostics
        )


class RRMCControlUseCase(MotionControllerUseCase):
    """Resolved-rate controller: pseudoinverse rates scaled into the velocity limits"""

    name = "rrmc"

    def execute(self, cfg: Configuration, goal: Pose3) -> ControlCommand:
        jacobian, base_to_ee, nu_base, error_norm = self._targets(cfg, goal)
        qd = np.linalg.pinv(jacobian) @ nu_base.as_array()

        v_max, w_max = self.gains.base_vel_limits
        limits = self.model.qd_max.copy()
        for index, joint in enumerate(self.model.joints[: self.model.n_base]):
            limits[index] = w_max if joint.is_rotational else v_max
        ratio = float(np.max(np.abs(qd) / limits))
        if ratio > 1.0:
            qd = qd / ratio
        return ControlCommand.from_joint_rates(
            self.model,
            qd,
            theta_eps=_bearing(base_to_ee),
            error_norm=error_norm,
            manip=manipulability(jacobian[:, self.model.n_base :]),
        )


@dataclass(frozen=True)
class SequentialBaselineSettings:
    """
    Tuning of the drive-then-reach baseline.

    standoff_distance is the planar position tolerance of the base phase;
    reach_offset moves the standoff pose back along its own x axis, so the
    arm reaches out in the servo phase. Angles are radians.
    """

    standoff_distance: float = 0.02
    reach_offset: float = 0.15
    heading_tolerance: float = float(np.radians(1.0))
    align_tolerance: float = float(np.radians(10.0))
    drive_gain: float = 0.35
    turn_gain: float = 2.0

    def __post_init__(self):
        if self.standoff_distance <= 0:
            raise ValueError("standoff_distance must be positive")
        if self.reach_offset < 0:
            raise ValueError("reach_offset must be non-negative")
        if not 0 < self.heading_tolerance <= self.align_tolerance:
            raise ValueError("heading_tolerance must be positive and <= align_tolerance")
        if self.drive_gain <= 0 or self.turn_gain <= 0:
            raise ValueError("Drive and turn gains must be positive")


class SequentialPhase(str, Enum):
    DRIVE_BASE = "drive_base"
    SERVO_ARM = "servo_arm"


@dataclass(frozen=True)
class SequentialPhaseState:
    """Active phase of the sequential baseline and the base pose it drives to"""

    phase: SequentialPhase = SequentialPhase.DRIVE_BASE
    standoff: Optional[Tuple[float, float, float]] = None

    @classmethod
    def create(cls) -> "SequentialPhaseState":
        return cls()


def standoff_pose(
    model: KinematicModel, q_a: np.ndarray, goal: Pose3, reach_offset: float = 0.0
) -> Tuple[float, float, float]:
    """
    Planar base pose that puts the end-effector at the goal with the arm held at q_a,
    moved back by reach_offset metres along its own x axis.
    """
    base_goal = goal.as_matrix() @ np.linalg.inv(model.base_to_end_effector(q_a))
    base_goal = base_goal @ Pose3.trans(-reach_offset, 0.0, 0.0).as_matrix()
    heading = float(np.arctan2(base_goal[1, 0], base_goal[0, 0]))
    return float(base_goal[0, 3]), float(base_goal[1, 3]), heading


def turn_drive_turn(
    base_pose: np.ndarray,
    target: Tuple[float, float, float],
    settings: SequentialBaselineSettings,
    v_max: float,
    w_max: float,
) -> Tuple[float, float, bool]:
    """
    Stateless unicycle law: face the target, drive to it, then turn to its heading.

    Returns (v, omega, arrived).
    """
    x, y, theta = base_pose
    dx, dy = target[0] - x, target[1] - y
    distance = float(np.hypot(dx, dy))
    if distance > settings.standoff_distance:
        bearing = wrap_angle(np.arctan2(dy, dx) - theta)
        omega = float(np.clip(settings.turn_gain * bearing, -w_max, w_max))
        if abs(bearing) > settings.align_tolerance:
            return 0.0, omega, False
        v = min(v_max, settings.drive_gain * distance)
        return v, omega, False

    heading_error = wrap_angle(target[2] - theta)
    if abs(heading_error) <= settings.heading_tolerance:
        return 0.0, 0.0, True
    return 0.0, float(np.clip(settings.turn_gain * heading_error, -w_max, w_max)), False


def sequential_baseline_step(
    model: KinematicModel,
    cfg: Configuration,
    goal: Pose3,
    gains: ControllerGains,
    phase_state: SequentialPhaseState,
    solver: QPSolverInterface,
    settings: Optional[SequentialBaselineSettings] = None,
    jm_variant: ManipulabilityVariant = ManipulabilityVariant.ARM_ONLY,
    warm_start: Optional[QPSolution] = None,
) -> Tuple[ControlCommand, SequentialPhaseState, Optional[QPSolution]]:
    """
    One step of the non-holistic baseline.

    Drive phase: the base moves to the standoff pose with the arm frozen.
    Servo phase: an arm-only QP with the base columns bounded to zero.
    """
    settings = settings or SequentialBaselineSettings()
    _check_configuration(model, cfg)

    if phase_state.phase == SequentialPhase.DRIVE_BASE:
        if phase_state.standoff is None:
            standoff = standoff_pose(model, cfg.q_a, goal, settings.reach_offset)
            phase_state = replace(phase_state, standoff=standoff)
        v, omega, arrived = turn_drive_turn(
            cfg.base_pose, phase_state.standoff, settings, gains.v_max, gains.w_max
        )
        if not arrived:
            command = ControlCommand.base_only(model, v, omega)
            return command, phase_state, warm_start
        logger.info(
            "Sequential baseline switching to arm servoing",
            base_pose=np.round(cfg.base_pose, 4).tolist(),
        )
        phase_state = replace(phase_state, phase=SequentialPhase.SERVO_ARM)

    jacobian, base_to_ee = model.base_kinematics(cfg.q_a)
    T_e = Pose3.from_matrix(cfg.base_transform.as_matrix() @ base_to_ee)
    error_norm, _ = pose_error(T_e, goal)
    nu_base = Twist.create(
        adjoint_rotation(base_to_ee[:3, :3]) @ pbs_twist(T_e, goal, gains.beta).as_array()
    )
    problem = build_qp(
        model, cfg, nu_base, gains, jm_variant, error_norm, kinematics=(jacobian, base_to_ee)
    )
    lower, upper = problem.lower.copy(), problem.upper.copy()
    lower[: model.n_base] = 0.0
    upper[: model.n_base] = 0.0
    problem = replace(problem, lower=lower, upper=upper)

    diagnostics = {
        "theta_eps": _bearing(base_to_ee),
        "error_norm": error_norm,
        "manip": manipulability(jacobian[:, model.n_base :]),
    }
    solution = _solve_or_fail(solver, problem, warm_start, **diagnostics)
    x = _clip_to_bounds(problem, solution.x)
    qd = x[: model.n].copy()
    qd[: model.n_base] = 0.0
    command = ControlCommand.from_joint_rates(model, qd, slack=x[model.n :], **diagnostics)
    return command, phase_state, solution


class SequentialBaselineUseCase(MotionControllerUseCase):
    """Drive-then-reach baseline that owns its phase state"""

    name = "sequential"

    def __init__(
        self,
        model: KinematicModel,
        solver: QPSolverInterface,
        gains: Optional[ControllerGains] = None,
        settings: Optional[SequentialBaselineSettings] = None,
        jm_variant: ManipulabilityVariant = ManipulabilityVariant.ARM_ONLY,
    ):
        super().__init__(model, gains)
        self.solver = solver
        self.settings = settings or SequentialBaselineSettings()
        self.jm_variant = ManipulabilityVariant(jm_variant)
        self.phase_state = SequentialPhaseState.create()
        self._last_solution: Optional[QPSolution] = None

    def reset(self) -> None:
        self.phase_state = SequentialPhaseState.create()
        self._last_solution = None
        self.solver.reset()

    def execute(self, cfg: Configuration, goal: Pose3) -> ControlCommand:
        command, self.phase_state, self._last_solution = sequential_baseline_step(
            self.model,
            cfg,
            goal,
            self.gains,
            self.phase_state,
            self.solver,
            self.settings,
            self.jm_variant,
            self._last_solution,
        )
        return command


def holistic_step(
    model: KinematicModel,
    cfg: Configuration,
    goal: Pose3,
    gains: ControllerGains,
    jm_variant: ManipulabilityVariant,
    solver: QPSolverInterface,
) -> ControlCommand:
    """Stateless single holistic step (no warm start)"""
    return HolisticControlUseCase(model, solver, gains, jm_variant).execute(cfg, goal)


class ControllerKind(str, Enum):
    HOLISTIC = "holistic"
    SEQUENTIAL = "sequential"
    RRMC = "rrmc"


@dataclass(frozen=True)
class ControllerFactory:
    """
    Builds fresh controllers with their own solver workspace.

    Picklable so worker processes can rebuild controllers locally.
    """

    model: KinematicModel
    solver_factory: Callable[[], QPSolverInterface]
    gains: ControllerGains = field(default_factory=ControllerGains.defaults)
    jm_variant: ManipulabilityVariant = ManipulabilityVariant.ARM_ONLY
    sequential_settings: SequentialBaselineSettings = field(default_factory=SequentialBaselineSettings)

    def create(self, kind: ControllerKind) -> MotionControllerUseCase:
        kind = ControllerKind(kind)
        if kind == ControllerKind.HOLISTIC:
            return HolisticControlUseCase(self.model, self.solver_factory(), self.gains, self.jm_variant)
        if kind == ControllerKind.SEQUENTIAL:
            return SequentialBaselineUseCase(
                self.model, self.solver_factory(), self.gains, self.sequential_settings, self.jm_variant
            )
        return RRMCControlUseCase(self.model, self.gains)

    def with_gains(self, gains: ControllerGains) -> "ControllerFactory":
        return replace(self, gains=gains)

    def with_variant(self, jm_variant: ManipulabilityVariant) -> "ControllerFactory":
        return replace(self, jm_variant=ManipulabilityVariant(jm_variant))
