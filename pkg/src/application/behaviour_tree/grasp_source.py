from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.entities.value_objects.pose import Pose3, Twist, exp_twist
from src.entities.world_state import WorldState


@dataclass(frozen=True)
class GraspAttempt:
    """Grasp pose proposed for one object, and whether it will miss"""

    object_id: int
    pose: Pose3
    missed: bool = False


class ScriptedGraspSource:
    """
    Stand-in for a grasp detector.

    Proposes a grasp above the object nearest the pickup pose. With
    probability `failure_probability` the proposal is displaced by
    `miss_offset` in the plane, so the gripper closes on nothing.
    """

    def __init__(
        self,
        failure_probability: float = 0.0,
        miss_offset: float = 0.08,
        pickup_radius: float = 0.5,
    ):
        if not 0.0 <= failure_probability <= 1.0:
            raise ValueError("failure_probability must be in [0, 1]")
        if miss_offset <= 0 or pickup_radius <= 0:
            raise ValueError("miss_offset and pickup_radius must be positive")
        self.failure_probability = failure_probability
        self.miss_offset = miss_offset
        self.pickup_radius = pickup_radius

    def draw_miss(self, rng: np.random.Generator) -> bool:
        return bool(rng.uniform() < self.failure_probability)

    def propose(
        self, world: WorldState, pickup: Pose3, rng: np.random.Generator
    ) -> Optional[GraspAttempt]:
        candidates = [
            obj
            for obj in world.objects
            if obj.id != world.held_object
            and np.hypot(*(obj.pose.translation[:2] - pickup.translation[:2])) <= self.pickup_radius
        ]
        if not candidates:
            return None
        target = min(
            candidates,
            key=lambda obj: (np.linalg.norm(obj.pose.translation[:2] - pickup.translation[:2]), obj.id),
        )
        missed = self.draw_miss(rng)
        pose = Pose3(rotation=pickup.rotation.copy(), translation=target.pose.translation.copy())
        if missed:
            direction = rng.uniform(-np.pi, np.pi)
            shift = Twist(linear=self.miss_offset * np.array([np.cos(direction), np.sin(direction), 0.0]))
            pose = exp_twist(shift) @ pose
        return GraspAttempt(target.id, pose, missed)
