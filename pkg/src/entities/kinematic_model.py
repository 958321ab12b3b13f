from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.entities.value_objects.pose import Pose3, adjoint_rotation


class JointKind(str, Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"
    VIRTUAL_BASE_ROTATION = "virtual-base-rotation"
    VIRTUAL_BASE_TRANSLATION = "virtual-base-translation"


class BaseKind(str, Enum):
    NONHOLONOMIC = "nonholonomic"
    OMNIDIRECTIONAL = "omnidirectional"


class JacobianFrame(str, Enum):
    WORLD = "world"
    BASE = "base"
    END_EFFECTOR = "end-effector"


class ManipulabilityVariant(str, Enum):
    """Which manipulability Jacobian feeds the linear cost"""

    ARM_ONLY = "arm_only"
    WHOLE_PLATFORM = "whole_platform"
    ZERO = "zero"

    @classmethod
    def create(cls, value: str) -> "ManipulabilityVariant":
        aliases = {"whole": cls.WHOLE_PLATFORM, "arm": cls.ARM_ONLY}
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"Invalid manipulability variant: {value}")


_ROTATIONAL = (JointKind.REVOLUTE, JointKind.VIRTUAL_BASE_ROTATION)
_VIRTUAL = (JointKind.VIRTUAL_BASE_ROTATION, JointKind.VIRTUAL_BASE_TRANSLATION)


@dataclass(frozen=True, eq=False)
class JointDesc:
    """
    A single joint of the augmented chain.

    Virtual base joints carry infinite position limits; arm joints must
    have q_min < q_max. Every joint needs a positive velocity limit.
    """

    kind: JointKind
    axis: np.ndarray
    q_min: float = -np.inf
    q_max: float = np.inf
    qd_max: float = 1.0
    name: str = ""

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(-1)
        if axis.shape != (3,):
            raise ValueError("Joint axis must be a 3-vector")
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            raise ValueError("Joint axis must be non-zero")
        object.__setattr__(self, "axis", axis / norm)
        object.__setattr__(self, "kind", JointKind(self.kind))

        if self.qd_max <= 0:
            raise ValueError(f"Joint {self.name or self.kind.value}: qd_max must be > 0")
        if self.is_virtual:
            object.__setattr__(self, "q_min", -np.inf)
            object.__setattr__(self, "q_max", np.inf)
        elif not self.q_min < self.q_max:
            raise ValueError(
                f"Joint {self.name or self.kind.value}: q_min must be < q_max "
                f"(got {self.q_min} >= {self.q_max})"
            )

    @property
    def is_virtual(self) -> bool:
        return self.kind in _VIRTUAL

    @property
    def is_rotational(self) -> bool:
        return self.kind in _ROTATIONAL

    def transform(self, value: float) -> np.ndarray:
        """4x4 motion of this joint at coordinate `value`"""
        matrix = np.eye(4)
        if self.is_rotational:
            k = self.axis
            skew = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
            matrix[:3, :3] = (
                np.eye(3) + np.sin(value) * skew + (1.0 - np.cos(value)) * (skew @ skew)
            )
        else:
            matrix[:3, 3] = value * self.axis
        return matrix

    def __repr__(self) -> str:
        return f"JointDesc({self.name or self.kind.value}, axis={self.axis.tolist()})"


@dataclass(frozen=True, eq=False)
class FixedElement:
    """Constant transform between two joints"""

    pose: Pose3

    def transform(self) -> np.ndarray:
        return self.pose.as_matrix()


ChainElement = Union[FixedElement, JointDesc]


@dataclass(frozen=True, eq=False)
class Configuration:
    """
    Robot configuration: planar base pose (x, y, theta) and arm joints.

    Virtual base joints are not part of the configuration; they are always
    evaluated at zero.
    """

    base_pose: np.ndarray
    q_a: np.ndarray

    def __post_init__(self):
        base_pose = np.asarray(self.base_pose, dtype=float).reshape(-1)
        if base_pose.shape != (3,):
            raise ValueError("Base pose must be (x, y, theta)")
        object.__setattr__(self, "base_pose", base_pose)
        object.__setattr__(self, "q_a", np.asarray(self.q_a, dtype=float).reshape(-1))

    @classmethod
    def create(cls, x: float, y: float, theta: float, q_a: Sequence[float]) -> "Configuration":
        """Factory method to create a Configuration"""
        return cls(base_pose=np.array([x, y, theta]), q_a=np.asarray(q_a, dtype=float))

    @property
    def base_transform(self) -> Pose3:
        x, y, theta = self.base_pose
        return Pose3.planar(x, y, theta)


def _virtual_joints(base_kind: BaseKind, base_qd: Tuple[float, float]) -> List[JointDesc]:
    v_max, w_max = base_qd
    x_axis, y_axis, z_axis = np.eye(3)
    if base_kind == BaseKind.NONHOLONOMIC:
        return [
            JointDesc(JointKind.VIRTUAL_BASE_ROTATION, z_axis, qd_max=w_max, name="delta_theta"),
            JointDesc(JointKind.VIRTUAL_BASE_TRANSLATION, x_axis, qd_max=v_max, name="delta_d"),
        ]
    return [
        JointDesc(JointKind.VIRTUAL_BASE_TRANSLATION, x_axis, qd_max=v_max, name="delta_x"),
        JointDesc(JointKind.VIRTUAL_BASE_TRANSLATION, y_axis, qd_max=v_max, name="delta_y"),
        JointDesc(JointKind.VIRTUAL_BASE_ROTATION, z_axis, qd_max=w_max, name="delta_theta"),
    ]


@dataclass(frozen=True, eq=False)
class KinematicModel:
    """
    Mobile manipulator as an augmented serial chain.

    The chain is: virtual base joints, base-to-arm mount, arm elements
    (fixed transforms and joints), tool. Joint columns are always ordered
    base virtual joints first, then arm joints.
    """

    base_kind: BaseKind
    base_to_arm: Pose3
    elements: Tuple[ChainElement, ...]
    tool: Pose3 = field(default_factory=Pose3.identity)
    wheel_radius: float = 0.1
    wheel_separation: float = 0.5
    base_qd_max: Tuple[float, float] = (1.0, 1.0)
    ready: Optional[np.ndarray] = None
    name: str = "model"

    def __post_init__(self):
        object.__setattr__(self, "base_kind", BaseKind(self.base_kind))
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.wheel_radius <= 0 or self.wheel_separation <= 0:
            raise ValueError("Wheel radius and separation must be positive")
        if min(self.base_qd_max) <= 0:
            raise ValueError("Base velocity limits must be positive")

        arm_joints = [e for e in self.elements if isinstance(e, JointDesc)]
        if not arm_joints:
            raise ValueError("Model must have at least one arm joint")
        if any(j.is_virtual for j in arm_joints):
            raise ValueError("Virtual base joints are implied by the base kind")
        object.__setattr__(self, "_arm_joints", tuple(arm_joints))
        object.__setattr__(
            self, "_virtual", tuple(_virtual_joints(self.base_kind, self.base_qd_max))
        )

        if self.ready is None:
            ready = np.clip(np.zeros(len(arm_joints)), self.q_min, self.q_max)
        else:
            ready = np.asarray(self.ready, dtype=float).reshape(-1)
            if ready.shape != (len(arm_joints),):
                raise ValueError(
                    f"Ready configuration has {ready.shape[0]} values, "
                    f"model has {len(arm_joints)} arm joints"
                )
            if np.any(ready < self.q_min) or np.any(ready > self.q_max):
                raise ValueError("Ready configuration violates joint limits")
        object.__setattr__(self, "ready", ready)

        # Pre-multiplied fixed transforms for the hot kinematics loop.
        object.__setattr__(self, "_mount", self.base_to_arm.as_matrix())
        object.__setattr__(self, "_tool", self.tool.as_matrix())
        object.__setattr__(
            self,
            "_compiled",
            tuple(e.transform() if isinstance(e, FixedElement) else e for e in self.elements),
        )

    # ----------------------------------------------------------------- sizes
    @property
    def n_base(self) -> int:
        return len(self._virtual)

    @property
    def n_arm(self) -> int:
        return len(self._arm_joints)

    @property
    def n(self) -> int:
        return self.n_base + self.n_arm

    @property
    def joints(self) -> Tuple[JointDesc, ...]:
        return self._virtual + self._arm_joints

    @property
    def arm_joints(self) -> Tuple[JointDesc, ...]:
        return self._arm_joints

    @property
    def q_min(self) -> np.ndarray:
        return np.array([j.q_min for j in self._arm_joints])

    @property
    def q_max(self) -> np.ndarray:
        return np.array([j.q_max for j in self._arm_joints])

    @property
    def qd_max(self) -> np.ndarray:
        """Velocity limits of all joints, virtual ones first"""
        return np.array([j.qd_max for j in self.joints])

    @property
    def rotation_joint_index(self) -> int:
        """Column of the base-rotation virtual joint"""
        for index, joint in enumerate(self._virtual):
            if joint.kind == JointKind.VIRTUAL_BASE_ROTATION:
                return index
        raise ValueError("Model has no base rotation joint")  # pragma: no cover

    def ready_configuration(self, x: float = 0.0, y: float = 0.0, theta: float = 0.0) -> Configuration:
        return Configuration.create(x, y, theta, self.ready.copy())

    def random_configuration(
        self, rng: np.random.Generator, margin: float = 0.0
    ) -> np.ndarray:
        """Arm joints sampled uniformly inside the limits shrunk by `margin`"""
        low, high = self.q_min + margin, self.q_max - margin
        high = np.maximum(high, low)
        return rng.uniform(low, high)

    def check_arm(self, q_a: np.ndarray) -> np.ndarray:
        q_a = np.asarray(q_a, dtype=float).reshape(-1)
        if q_a.shape != (self.n_arm,):
            raise ValueError(
                f"Arm configuration has {q_a.shape[0]} values, model expects {self.n_arm}"
            )
        return q_a

    # ------------------------------------------------------------ kinematics
    def _chain(self, q_full: np.ndarray, with_frames: bool = True):
        """
        Walk the augmented chain in the base frame.

        Returns the end-effector transform and, per joint, the frame at
        which the joint acts.
        """
        frames = []
        current = np.eye(4)
        for joint, value in zip(self._virtual, q_full[: self.n_base]):
            if with_frames:
                frames.append(current)
            current = current @ joint.transform(value)
        current = current @ self._mount
        arm_values = iter(q_full[self.n_base :])
        for element in self._compiled:
            if isinstance(element, JointDesc):
                if with_frames:
                    frames.append(current)
                current = current @ element.transform(next(arm_values))
            else:
                current = current @ element
        current = current @ self._tool
        return current, frames

    def base_to_end_effector(self, q_a: np.ndarray, q_base: Optional[np.ndarray] = None) -> np.ndarray:
        """4x4 bTe, optionally with non-zero virtual joint values"""
        q_a = self.check_arm(q_a)
        q_base = np.zeros(self.n_base) if q_base is None else np.asarray(q_base, dtype=float)
        end, _ = self._chain(np.concatenate((q_base, q_a)), with_frames=False)
        return end

    def fkine(self, cfg: Configuration) -> Pose3:
        """World pose of the end-effector: 0Tb(x, y, theta) . bTa . aTe(q_a) . tool"""
        end = self.base_to_end_effector(cfg.q_a)
        return Pose3.from_matrix(cfg.base_transform.as_matrix() @ end)

    def base_kinematics(self, q_a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Base-frame Jacobian (6 x n) and 4x4 bTe from a single chain walk"""
        q_a = self.check_arm(q_a)
        end, frames = self._chain(np.concatenate((np.zeros(self.n_base), q_a)))
        p_end = end[:3, 3]
        jacobian = np.zeros((6, self.n))
        for column, (joint, frame) in enumerate(zip(self.joints, frames)):
            axis = frame[:3, :3] @ joint.axis
            if joint.is_rotational:
                jacobian[:3, column] = np.cross(axis, p_end - frame[:3, 3])
                jacobian[3:, column] = axis
            else:
                jacobian[:3, column] = axis
        return jacobian, end

    def jacobian(self, cfg: Configuration, frame: JacobianFrame = JacobianFrame.BASE) -> np.ndarray:
        """Geometric Jacobian of the augmented chain, virtual joints at zero"""
        jacobian, end = self.base_kinematics(cfg.q_a)
        frame = JacobianFrame(frame)
        if frame == JacobianFrame.BASE:
            return jacobian
        if frame == JacobianFrame.WORLD:
            return adjoint_rotation(cfg.base_transform.rotation) @ jacobian
        return adjoint_rotation(end[:3, :3].T) @ jacobian

    def arm_jacobian(self, cfg: Configuration) -> np.ndarray:
        jacobian, _ = self.base_kinematics(cfg.q_a)
        return jacobian[:, self.n_base :]

    def manipulability(self, cfg: Configuration) -> float:
        return manipulability(self.arm_jacobian(cfg))

    def manipulability_jacobian(
        self,
        cfg: Configuration,
        variant: ManipulabilityVariant = ManipulabilityVariant.ARM_ONLY,
        jacobian: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Gradient of a manipulability measure over all n joints.

        ARM_ONLY: (0_b, dm(q_a)/dq_a); WHOLE_PLATFORM: gradient of the
        measure of the full 6 x n Jacobian; ZERO: all zeros. A base-frame
        Jacobian already computed for `cfg` may be passed in.
        """
        variant = ManipulabilityVariant(variant)
        gradient = np.zeros(self.n)
        if variant == ManipulabilityVariant.ZERO:
            return gradient
        if jacobian is None:
            jacobian, _ = self.base_kinematics(cfg.q_a)
        if variant == ManipulabilityVariant.WHOLE_PLATFORM:
            return manipulability_gradient(jacobian, hessian_from_jacobian(jacobian))
        arm = jacobian[:, self.n_base :]
        gradient[self.n_base :] = manipulability_gradient(arm, hessian_from_jacobian(arm))
        return gradient

    def __repr__(self) -> str:
        return f"KinematicModel(name={self.name}, base={self.base_kind.value}, n={self.n})"


def hessian_from_jacobian(jacobian: np.ndarray) -> np.ndarray:
    """
    Hessian H[j, :, i] = dJ_i / dq_j of a geometric Jacobian.

    Prismatic columns have zero angular part, which zeroes their
    rotational contributions without special casing.
    """
    linear = jacobian[:3].T
    angular = jacobian[3:].T
    n = jacobian.shape[1]
    w_x_v = np.cross(angular[:, None, :], linear[None, :, :])
    w_x_w = np.cross(angular[:, None, :], angular[None, :, :])
    after = (np.arange(n)[None, :] > np.arange(n)[:, None])[:, :, None]

    hessian_linear = np.where(after, w_x_v, w_x_v.transpose(1, 0, 2))
    hessian_angular = np.where(after, w_x_w, 0.0)
    return np.concatenate(
        (hessian_linear.transpose(0, 2, 1), hessian_angular.transpose(0, 2, 1)), axis=1
    )


def manipulability(jacobian: np.ndarray) -> float:
    """Yoshikawa measure sqrt(det(J J^T)), clamped at zero"""
    jacobian = np.asarray(jacobian, dtype=float)
    if jacobian.ndim != 2 or jacobian.shape[1] < 1:
        raise ValueError("Manipulability needs a 2-D Jacobian with at least one column")
    determinant = np.linalg.det(jacobian @ jacobian.T)
    return float(np.sqrt(max(determinant, 0.0)))


def manipulability_gradient(jacobian: np.ndarray, hessian: np.ndarray) -> np.ndarray:
    """dm/dq_j = m * trace((J J^T)^-1 J H_j^T)"""
    measure = manipulability(jacobian)
    if measure < 1e-12:
        return np.zeros(jacobian.shape[1])
    inverse_jjt = np.linalg.inv(jacobian @ jacobian.T)
    return measure * np.einsum("ac,ck,jak->j", inverse_jjt, jacobian, hessian)


def inverse_wheel_map(
    w_left: float, w_right: float, wheel_radius: float, wheel_separation: float
) -> Tuple[float, float]:
    """Wheel speeds to (theta_dot, d_dot)"""
    _check_wheels(wheel_radius, wheel_separation)
    theta_dot = wheel_radius / wheel_separation * (w_right - w_left)
    d_dot = wheel_radius / 2.0 * (w_right + w_left)
    return theta_dot, d_dot


def wheel_map(
    qd_base: Sequence[float], wheel_radius: float, wheel_separation: float
) -> Tuple[float, float]:
    """(theta_dot, d_dot) to (left, right) wheel speeds"""
    _check_wheels(wheel_radius, wheel_separation)
    theta_dot, d_dot = qd_base
    w_right = (2.0 * d_dot + wheel_separation * theta_dot) / (2.0 * wheel_radius)
    w_left = (2.0 * d_dot - wheel_separation * theta_dot) / (2.0 * wheel_radius)
    return w_left, w_right


def _check_wheels(wheel_radius: float, wheel_separation: float) -> None:
    if wheel_radius <= 0 or wheel_separation <= 0:
        raise ValueError("Wheel radius and separation must be positive")
