"""
Simulated leaf behaviours for the mobile manipulator.

Motion leaves advance the world by `steps_per_tick` control periods per
tick, so the tree ticks at tick_rate while motion runs at control_rate.
"""

from dataclasses import replace
from typing import Callable, Dict, Optional

import numpy as np

from src.app_logs import get_logger
from src.application.behaviour_tree.blackboard import Blackboard
from src.application.behaviour_tree.nodes import Leaf
from src.application.exceptions import ControllerFailureException
from src.application.use_cases.motion_control_use_cases import pose_error, turn_drive_turn
from src.entities.control_command import ControlCommand
from src.entities.value_objects.pose import Pose3
from src.entities.value_objects.tick_status import TickStatus
from src.entities.world_state import GRIPPER_OPEN_WIDTH

logger = get_logger(__name__)

HOLDING_WIDTH = 0.04
GRASP_CAPTURE_DISTANCE = 0.03
CLOSED_TOLERANCE = 1e-6


class BaseToPose(Leaf):
    """Turn-drive-turn to a named map pose; the arm does not move"""

    moves_robot = True

    def __init__(self, name: str, pose_name: str):
        super().__init__(name)
        self.pose_name = pose_name

    def run(self, bb: Blackboard) -> TickStatus:
        target = bb.planar_pose(self.pose_name)
        for _ in range(bb.steps_per_tick):
            v, omega, arrived = turn_drive_turn(
                bb.world.base_pose, target, bb.drive_settings, bb.gains.v_max, bb.gains.w_max
            )
            if arrived:
                return TickStatus.SUCCESS
            if bb.advance(ControlCommand.base_only(bb.model, v, omega)):
                return TickStatus.FAILURE
        return TickStatus.RUNNING


class ArmToConfig(Leaf):
    """Joint-space ramp to a named arm configuration"""

    moves_robot = True

    def __init__(self, name: str, configuration_name: str, speed_fraction: float = 0.5, tolerance: float = 1e-3):
        super().__init__(name)
        if not 0 < speed_fraction <= 1:
            raise ValueError("speed_fraction must be in (0, 1]")
        self.configuration_name = configuration_name
        self.speed_fraction = speed_fraction
        self.tolerance = tolerance

    def run(self, bb: Blackboard) -> TickStatus:
        target = np.asarray(bb.named_configurations[self.configuration_name], dtype=float)
        speed = self.speed_fraction * bb.model.qd_max[bb.model.n_base :]
        for _ in range(bb.steps_per_tick):
            remaining = target - bb.world.q_a
            if np.max(np.abs(remaining)) < self.tolerance:
                return TickStatus.SUCCESS
            qd = np.clip(remaining / bb.dt, -speed, speed)
            if bb.advance(ControlCommand.arm_only(bb.model, qd)):
                return TickStatus.FAILURE
        return TickStatus.RUNNING


class OpenGripper(Leaf):
    """Opens the gripper; a held object is released where the hand is"""

    def run(self, bb: Blackboard) -> TickStatus:
        world = bb.world
        if world.held_object is not None:
            released = world.find_object(world.held_object).with_pose(bb.end_effector())
            objects = [released if obj.id == released.id else obj for obj in world.objects]
            bb.world = replace(world, objects=tuple(objects), held_object=None, gripper_width=GRIPPER_OPEN_WIDTH)
            bb.stats.placements += 1
            bb.stats.pick_place_times.append(bb.world.time - bb.stats.cycle_start)
            bb.stats.cycle_start = bb.world.time
            logger.info("Object placed", object_id=released.id, time=round(bb.world.time, 3))
        else:
            bb.world = replace(world, gripper_width=GRIPPER_OPEN_WIDTH)
        return TickStatus.SUCCESS


class CloseGripper(Leaf):
    """
    Closes the gripper on the current grasp target.

    The target is held when the hand is within the capture distance of it;
    otherwise the gripper closes fully on nothing.
    """

    def run(self, bb: Blackboard) -> TickStatus:
        grasp, bb.current_grasp = bb.current_grasp, None
        world = bb.world
        if world.held_object is not None:
            return TickStatus.SUCCESS
        if grasp is not None:
            target = world.find_object(grasp.object_id)
            distance = np.linalg.norm(bb.end_effector().translation - target.pose.translation)
            if distance <= GRASP_CAPTURE_DISTANCE:
                bb.world = replace(world, held_object=target.id, gripper_width=HOLDING_WIDTH)
                bb.stats.grasp_times.append(bb.world.time - bb.stats.cycle_start)
                return TickStatus.SUCCESS
        logger.info("Grasp missed", attempt=bb.stats.attempts, time=round(world.time, 3))
        bb.world = replace(world, gripper_width=0.0)
        return TickStatus.SUCCESS


class GripperClosed(Leaf):
    def run(self, bb: Blackboard) -> TickStatus:
        return TickStatus.SUCCESS if bb.world.gripper_width <= CLOSED_TOLERANCE else TickStatus.FAILURE


class ArmError(Leaf):
    def run(self, bb: Blackboard) -> TickStatus:
        return TickStatus.SUCCESS if bb.world.arm_error else TickStatus.FAILURE


class RecoverArm(Leaf):
    def run(self, bb: Blackboard) -> TickStatus:
        # The clamp left the arm on a limit; nudge it just inside so the ramp can start.
        margin = 1e-6
        q_a = np.clip(bb.world.q_a, bb.world.q_min + margin, bb.world.q_max - margin)
        bb.world = replace(bb.world, q_a=q_a, arm_error=False)
        bb.goal_pose = None
        bb.current_grasp = None
        if bb.controller is not None:
            bb.controller.reset()
        bb.stats.recovered_errors += 1
        logger.info("Arm error recovered", time=round(bb.world.time, 3))
        return TickStatus.SUCCESS


class LoadPose(Leaf):
    def __init__(self, name: str, pose_name: str):
        super().__init__(name)
        self.pose_name = pose_name

    def run(self, bb: Blackboard) -> TickStatus:
        if self.pose_name not in bb.named_poses:
            return TickStatus.FAILURE
        bb.loaded_pose = bb.named_poses[self.pose_name]
        return TickStatus.SUCCESS


class PublishPose(Leaf):
    """Moves the loaded pose onto the goal channel"""

    def run(self, bb: Blackboard) -> TickStatus:
        if bb.loaded_pose is None:
            return TickStatus.FAILURE
        bb.goal_pose = bb.loaded_pose
        return TickStatus.SUCCESS


class DistanceToGoal(Leaf):
    def __init__(self, name: str, threshold: float):
        super().__init__(name)
        if threshold <= 0:
            raise ValueError("threshold must be positive")
        self.threshold = threshold

    def run(self, bb: Blackboard) -> TickStatus:
        if bb.goal_pose is None:
            return TickStatus.FAILURE
        distance = np.linalg.norm(bb.end_effector().translation - bb.goal_pose.translation)
        return TickStatus.SUCCESS if distance < self.threshold else TickStatus.FAILURE


class MotionControl(Leaf):
    """
    Runs the motion controller against the goal channel.

    Reach mode succeeds within the pose tolerances; track mode keeps
    following the latest goal and only ever returns Running. A controller
    failure or a joint clamp raises the arm error and fails the leaf.
    """

    moves_robot = True

    def __init__(self, name: str, track: bool = False):
        super().__init__(name)
        self.track = track

    def _reached(self, bb: Blackboard, goal: Pose3) -> bool:
        error, angular = pose_error(bb.end_effector(), goal)
        return error < bb.position_tolerance and angular < bb.angular_tolerance

    def run(self, bb: Blackboard) -> TickStatus:
        goal = bb.goal_pose
        if goal is None or bb.controller is None:
            return TickStatus.FAILURE
        for _ in range(bb.steps_per_tick):
            if not self.track and self._reached(bb, goal):
                return TickStatus.SUCCESS
            try:
                command = bb.controller.execute(bb.world.configuration, goal)
            except ControllerFailureException as exc:
                logger.warning("Motion control failed", behaviour=self.name, **exc.diagnostics)
                bb.raise_arm_error()
                return TickStatus.FAILURE
            if bb.advance(command):
                return TickStatus.FAILURE
        if not self.track and self._reached(bb, goal):
            return TickStatus.SUCCESS
        return TickStatus.RUNNING


class SubscribeGraspPose(Leaf):
    """
    Loads the current grasp proposal, drawing a new one when none is active.

    Fails when no object is left near the pickup pose.
    """

    def __init__(self, name: str, pickup_pose_name: str = "pickup"):
        super().__init__(name)
        self.pickup_pose_name = pickup_pose_name

    def run(self, bb: Blackboard) -> TickStatus:
        if bb.grasp_source is None:
            return TickStatus.FAILURE
        if bb.current_grasp is None:
            bb.current_grasp = bb.grasp_source.propose(
                bb.world, bb.named_poses[self.pickup_pose_name], bb.rng
            )
            if bb.current_grasp is None:
                return TickStatus.FAILURE
            bb.stats.attempts += 1
        bb.loaded_pose = bb.current_grasp.pose
        return TickStatus.SUCCESS


LeafCreator = Callable[[str, Dict[str, str]], Leaf]


def _required(options: Dict[str, str], key: str) -> str:
    if key not in options:
        raise ValueError(f"missing option '{key}'")
    return options[key]


def _flag(value: Optional[str]) -> bool:
    return str(value).lower() in ("1", "true", "yes", "on")


LEAF_REGISTRY: Dict[str, LeafCreator] = {
    "base_to_pose": lambda name, options: BaseToPose(name, _required(options, "pose")),
    "arm_to_config": lambda name, options: ArmToConfig(name, options.get("config", "ready")),
    "open_gripper": lambda name, options: OpenGripper(name),
    "close_gripper": lambda name, options: CloseGripper(name),
    "gripper_closed": lambda name, options: GripperClosed(name),
    "arm_error": lambda name, options: ArmError(name),
    "recover_arm": lambda name, options: RecoverArm(name),
    "load_pose": lambda name, options: LoadPose(name, _required(options, "pose")),
    "publish_pose": lambda name, options: PublishPose(name),
    "distance_to_goal": lambda name, options: DistanceToGoal(name, float(_required(options, "threshold"))),
    "motion_control": lambda name, options: MotionControl(name, track=_flag(options.get("track"))),
    "subscribe_grasp_pose": lambda name, options: SubscribeGraspPose(name, options.get("pickup", "pickup")),
}
