from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.linalg import polar
from scipy.spatial.transform import Rotation

# Rotations drifting further than this from orthonormal are re-projected.
RENORMALISE_TOLERANCE = 1e-7
# Anything further than this is not a rotation at all.
REJECT_TOLERANCE = 1e-3


@dataclass(frozen=True, eq=False)
class Twist:
    """
    Twist value object holding a spatial velocity or displacement.

    Stored in (v_x, v_y, v_z, w_x, w_y, w_z) order: linear part first,
    angular part second.
    """

    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        linear = np.asarray(self.linear, dtype=float).reshape(-1)
        angular = np.asarray(self.angular, dtype=float).reshape(-1)
        if linear.shape != (3,) or angular.shape != (3,):
            raise ValueError("Twist parts must be 3-vectors")
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "angular", angular)

    @classmethod
    def create(cls, values: Iterable[float]) -> "Twist":
        """Factory method to create a Twist from a 6-vector"""
        array = np.asarray(list(values), dtype=float).reshape(-1)
        if array.shape != (6,):
            raise ValueError(f"Twist needs 6 components, got {array.shape[0]}")
        return cls(linear=array[:3], angular=array[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate((self.linear, self.angular))

    def scaled(self, gain: float) -> "Twist":
        return Twist(linear=gain * self.linear, angular=gain * self.angular)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def __repr__(self) -> str:
        return f"Twist({np.array2string(self.as_array(), precision=4)})"


@dataclass(frozen=True, eq=False)
class Pose3:
    """
    Pose3 value object that represents a rigid-body transform in SE(3).

    This is a value object because:
    - It's immutable (frozen=True)
    - It validates itself during creation
    - It has no identity, only value
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        """Validate and, when drift is small, re-orthonormalise the rotation"""
        rotation = np.asarray(self.rotation, dtype=float)
        translation = np.asarray(self.translation, dtype=float).reshape(-1)
        if rotation.shape != (3, 3):
            raise ValueError(f"Rotation must be 3x3, got {rotation.shape}")
        if translation.shape != (3,):
            raise ValueError(f"Translation must be a 3-vector, got {translation.shape}")
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise ValueError("Pose components must be finite")

        drift = np.max(np.abs(rotation.T @ rotation - np.eye(3)))
        if drift > REJECT_TOLERANCE:
            raise ValueError(f"Rotation is not orthonormal (drift {drift:.3e})")
        if drift > RENORMALISE_TOLERANCE:
            rotation, _ = polar(rotation)
        if np.linalg.det(rotation) <= 0.0:
            raise ValueError("Rotation must have determinant +1")

        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "Pose3":
        return cls()

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Pose3":
        """Factory method to create a Pose3 from a 4x4 homogeneous matrix"""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (4, 4):
            raise ValueError(f"Homogeneous matrix must be 4x4, got {matrix.shape}")
        return cls(rotation=matrix[:3, :3], translation=matrix[:3, 3])

    @classmethod
    def from_xyz_rpy(
        cls, xyz: Iterable[float], rpy: Optional[Iterable[float]] = None
    ) -> "Pose3":
        """Translation followed by R = Rz(yaw) @ Ry(pitch) @ Rx(roll)"""
        rotation = np.eye(3)
        if rpy is not None:
            rotation = Rotation.from_euler("xyz", list(rpy)).as_matrix()
        return cls(rotation=rotation, translation=np.asarray(list(xyz), dtype=float))

    @classmethod
    def planar(cls, x: float, y: float, theta: float) -> "Pose3":
        """Pose of a ground vehicle: position in the plane plus heading"""
        c, s = np.cos(theta), np.sin(theta)
        rotation = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return cls(rotation=rotation, translation=np.array([x, y, 0.0]))

    @classmethod
    def trans(cls, x: float, y: float, z: float) -> "Pose3":
        return cls(translation=np.array([x, y, z], dtype=float))

    @classmethod
    def rot_z(cls, angle: float) -> "Pose3":
        return cls.planar(0.0, 0.0, angle)

    def as_matrix(self) -> np.ndarray:
        matrix = np.eye(4)
        matrix[:3, :3] = self.rotation
        matrix[:3, 3] = self.translation
        return matrix

    def __matmul__(self, other: "Pose3") -> "Pose3":
        return compose(self, other)

    def is_close(self, other: "Pose3", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, atol=atol)
            and np.allclose(self.translation, other.translation, atol=atol)
        )

    def __repr__(self) -> str:
        rotvec = Rotation.from_matrix(self.rotation).as_rotvec()
        return (
            f"Pose3(t={np.array2string(self.translation, precision=4)}, "
            f"rotvec={np.array2string(rotvec, precision=4)})"
        )


def compose(a: Pose3, b: Pose3) -> Pose3:
    """Homogeneous product a @ b"""
    return Pose3(
        rotation=a.rotation @ b.rotation,
        translation=a.rotation @ b.translation + a.translation,
    )


def inverse(a: Pose3) -> Pose3:
    """Rigid inverse (R^T, -R^T t)"""
    rotation_t = a.rotation.T
    return Pose3(rotation=rotation_t, translation=-rotation_t @ a.translation)


def rotation_log(rotation: np.ndarray) -> np.ndarray:
    """
    Angle-axis vector of a rotation matrix.

    At an angle of pi the axis sign is ambiguous; the component with the
    largest magnitude is made positive.
    """
    rotvec = Rotation.from_matrix(rotation).as_rotvec()
    angle = np.linalg.norm(rotvec)
    if angle > np.pi - 1e-9:
        axis = rotvec / angle
        if axis[np.argmax(np.abs(axis))] < 0.0:
            axis = -axis
        rotvec = np.pi * axis
    return rotvec


def psi(transform: Pose3) -> Twist:
    """Spatial displacement of a transform: (translation, angle * axis)"""
    return Twist(linear=transform.translation.copy(), angular=rotation_log(transform.rotation))


def exp_twist(displacement: Twist) -> Pose3:
    """Inverse of psi"""
    rotation = Rotation.from_rotvec(displacement.angular).as_matrix()
    return Pose3(rotation=rotation, translation=displacement.linear.copy())


def adjoint_rotation(rotation: np.ndarray) -> np.ndarray:
    """6x6 blockdiag(R, R) re-expressing twists in a rotated frame"""
    adjoint = np.zeros((6, 6))
    adjoint[:3, :3] = rotation
    adjoint[3:, 3:] = rotation
    return adjoint
