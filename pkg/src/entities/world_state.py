from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from src.entities.kinematic_model import Configuration, KinematicModel
from src.entities.value_objects.pose import Pose3

GRIPPER_OPEN_WIDTH = 0.08
LIMIT_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class WorldObject:
    """Graspable object resting in the world"""

    id: int
    pose: Pose3

    def with_pose(self, pose: Pose3) -> "WorldObject":
        return WorldObject(id=self.id, pose=pose)


@dataclass(frozen=True, eq=False)
class WorldState:
    """
    Kinematic state of the simulated world.

    Arm joints always lie within [q_min, q_max]; integration clamps them
    and raises arm_error instead of leaving the limits.
    """

    base_pose: np.ndarray
    q_a: np.ndarray
    q_min: np.ndarray
    q_max: np.ndarray
    gripper_width: float = GRIPPER_OPEN_WIDTH
    held_object: Optional[int] = None
    objects: Tuple[WorldObject, ...] = field(default_factory=tuple)
    time: float = 0.0
    arm_error: bool = False

    def __post_init__(self):
        base_pose = np.asarray(self.base_pose, dtype=float).reshape(-1)
        if base_pose.shape != (3,):
            raise ValueError("Base pose must be (x, y, theta)")
        q_a = np.asarray(self.q_a, dtype=float).reshape(-1)
        q_min = np.asarray(self.q_min, dtype=float).reshape(-1)
        q_max = np.asarray(self.q_max, dtype=float).reshape(-1)
        if not q_a.shape == q_min.shape == q_max.shape:
            raise ValueError("Arm joints and limits must have the same length")
        if np.any(q_a < q_min - LIMIT_TOLERANCE) or np.any(q_a > q_max + LIMIT_TOLERANCE):
            raise ValueError("Arm joints outside their limits")
        if self.gripper_width < 0:
            raise ValueError("Gripper width cannot be negative")
        objects = tuple(self.objects)
        ids = [obj.id for obj in objects]
        if len(set(ids)) != len(ids):
            raise ValueError("Object ids must be unique")
        if self.held_object is not None and self.held_object not in ids:
            raise ValueError(f"Held object {self.held_object} is not in the world")

        object.__setattr__(self, "base_pose", base_pose)
        object.__setattr__(self, "q_a", q_a)
        object.__setattr__(self, "q_min", q_min)
        object.__setattr__(self, "q_max", q_max)
        object.__setattr__(self, "objects", objects)

    @classmethod
    def create(
        cls,
        model: KinematicModel,
        base_pose: Sequence[float] = (0.0, 0.0, 0.0),
        q_a: Optional[Sequence[float]] = None,
        objects: Sequence[WorldObject] = (),
    ) -> "WorldState":
        """Factory method: a world with the model at `base_pose`, arm at ready by default"""
        return cls(
            base_pose=np.asarray(base_pose, dtype=float),
            q_a=model.ready.copy() if q_a is None else np.asarray(q_a, dtype=float),
            q_min=model.q_min,
            q_max=model.q_max,
            objects=tuple(objects),
        )

    @property
    def configuration(self) -> Configuration:
        return Configuration(base_pose=self.base_pose.copy(), q_a=self.q_a.copy())

    def limit_margin(self) -> float:
        """Smallest distance of any arm joint to one of its limits"""
        return float(np.min(np.minimum(self.q_a - self.q_min, self.q_max - self.q_a)))

    def find_object(self, object_id: int) -> WorldObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise ValueError(f"Object {object_id} is not in the world")

    def __repr__(self) -> str:
        return (
            f"WorldState(t={self.time:.3f}, base={np.round(self.base_pose, 4).tolist()}, "
            f"held={self.held_object}, arm_error={self.arm_error})"
        )
