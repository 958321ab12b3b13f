# Enterprise Business Rules Layer (Entities)
# This is the innermost layer with no dependencies on other layers

from .value_objects.pose import Pose3, Twist
from .value_objects.controller_gains import ControllerGains
from .value_objects.tick_status import TickStatus
from .kinematic_model import Configuration, JointDesc, KinematicModel, ManipulabilityVariant
from .qp_problem import QPProblem, QPSolution, QPStatus
from .control_command import ControlCommand
from .world_state import WorldObject, WorldState
from .metrics import FailureReason, PickPlaceMetrics, TrajectoryMetrics

__all__ = [
    "Pose3",
    "Twist",
    "ControllerGains",
    "TickStatus",
    "Configuration",
    "JointDesc",
    "KinematicModel",
    "ManipulabilityVariant",
    "QPProblem",
    "QPSolution",
    "QPStatus",
    "ControlCommand",
    "WorldObject",
    "WorldState",
    "FailureReason",
    "PickPlaceMetrics",
    "TrajectoryMetrics",
]
