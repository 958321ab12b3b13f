from typing import Iterable, Mapping

from py_trees import behaviour

from src.application.behaviour_tree import leaves
from src.application.behaviour_tree.nodes import (
    failure_is_running,
    inverter,
    memory_sequence,
    selector,
    sequence,
    success_is_running,
)
from src.application.exceptions import TreeConstructionException

REQUIRED_POSES = ("init", "pickup", "dropoff")
GRASP_LOCK_IN_DISTANCE = 0.25


def _require_poses(named_poses: Iterable[str]) -> None:
    missing = [name for name in REQUIRED_POSES if name not in set(named_poses)]
    if missing:
        raise TreeConstructionException(f"Pick-and-place tree needs named pose(s): {', '.join(missing)}")


def build_recovery_branch() -> behaviour.Behaviour:
    return memory_sequence(
        "Recovery",
        [
            leaves.ArmError("Arm Error?"),
            leaves.RecoverArm("Recover Arm"),
            leaves.ArmToConfig("Arm to Ready", "ready"),
            leaves.BaseToPose("Base to Init", "init"),
        ],
    )


def build_move_to_grasp(lock_in_distance: float = GRASP_LOCK_IN_DISTANCE) -> behaviour.Behaviour:
    """Track the grasp proposal until close, then lock it in and reach it"""
    return memory_sequence(
        "Move to Grasp",
        [
            leaves.SubscribeGraspPose("Subscribe Grasp Pose"),
            leaves.PublishPose("Publish Grasp Pose"),
            selector(
                "Approach Grasp",
                [
                    leaves.DistanceToGoal("Distance to Grasp", lock_in_distance),
                    sequence(
                        "Track Grasp",
                        [
                            leaves.SubscribeGraspPose("Resubscribe Grasp Pose"),
                            leaves.PublishPose("Republish Grasp Pose"),
                            leaves.MotionControl("Track Grasp Pose", track=True),
                        ],
                    ),
                ],
            ),
            leaves.MotionControl("Reach Grasp Pose"),
        ],
    )


def build_grasp_attempt(lock_in_distance: float = GRASP_LOCK_IN_DISTANCE) -> behaviour.Behaviour:
    return memory_sequence(
        "Grasp Attempt",
        [
            selector(
                "Ensure Gripper Open",
                [
                    inverter("Gripper Not Closed", leaves.GripperClosed("Gripper Closed?")),
                    leaves.OpenGripper("Open Gripper"),
                ],
            ),
            leaves.LoadPose("Load Pickup Pose", "pickup"),
            leaves.PublishPose("Publish Pickup Pose"),
            leaves.MotionControl("Move to Pickup"),
            build_move_to_grasp(lock_in_distance),
            leaves.CloseGripper("Close Gripper"),
            leaves.ArmToConfig("Retreat to Ready", "ready"),
            inverter("Grasp Succeeded", leaves.GripperClosed("Gripper Closed After Grasp?")),
        ],
    )


def build_pick_place_tree(
    named_poses: Mapping[str, object], lock_in_distance: float = GRASP_LOCK_IN_DISTANCE
) -> behaviour.Behaviour:
    """
    Repeating pick-and-place tree.

    A failed grasp attempt turns into Running and is retried; a completed
    cycle turns into Running and starts over. Any arm error sends the next
    tick down the recovery branch first.
    """
    _require_poses(named_poses)
    task = memory_sequence(
        "Pick and Place",
        [
            failure_is_running("Retry Grasp", build_grasp_attempt(lock_in_distance)),
            leaves.LoadPose("Load Dropoff Pose", "dropoff"),
            leaves.PublishPose("Publish Dropoff Pose"),
            leaves.MotionControl("Move to Dropoff"),
            leaves.OpenGripper("Release Object"),
            leaves.ArmToConfig("Return to Ready", "ready"),
        ],
    )
    return selector(
        "Root",
        [build_recovery_branch(), success_is_running("Repeat", task)],
    )
