from dataclasses import replace
from unittest.mock import MagicMock

import numpy as np
import pytest

from src.application.behaviour_tree.blackboard import Blackboard
from src.application.behaviour_tree.grasp_source import GraspAttempt, ScriptedGraspSource
from src.application.behaviour_tree.leaves import (
    ArmError,
    ArmToConfig,
    BaseToPose,
    CloseGripper,
    DistanceToGoal,
    GripperClosed,
    LoadPose,
    MotionControl,
    OpenGripper,
    PublishPose,
    RecoverArm,
    SubscribeGraspPose,
)
from src.application.behaviour_tree.nodes import tick
from src.application.behaviour_tree.trees import build_pick_place_tree
from src.application.exceptions import ControllerFailureException, TreeConstructionException
from src.application.use_cases.pick_place_use_cases import PickPlaceSettings, pick_place_layout
from src.entities.control_command import ControlCommand
from src.entities.value_objects.pose import Pose3
from src.entities.value_objects.tick_status import TickStatus
from tests.leaf_doubles import AlwaysSuccess
from src.entities.world_state import WorldObject, WorldState

S, F, R = TickStatus.SUCCESS, TickStatus.FAILURE, TickStatus.RUNNING


def make_blackboard(model, objects=(), **kwargs):
    world = WorldState.create(model, objects=objects)
    kwargs.setdefault("named_poses", pick_place_layout(model, world, PickPlaceSettings()))
    return Blackboard(world=world, model=model, **kwargs)


def test_blackboard_rates(frankie_model):
    bb = make_blackboard(frankie_model)
    assert bb.dt == pytest.approx(0.005)
    assert bb.steps_per_tick == 10
    assert bb.named_configurations["ready"] == pytest.approx(frankie_model.ready)
    with pytest.raises(ValueError):
        make_blackboard(frankie_model, control_rate=10.0, tick_rate=20.0)
    with pytest.raises(ValueError):
        make_blackboard(frankie_model, tick_rate=0.0)


def test_planar_pose_reads_heading(frankie_model):
    bb = make_blackboard(frankie_model, named_poses={"spot": Pose3.planar(1.0, -2.0, 0.7)})
    assert bb.planar_pose("spot") == pytest.approx((1.0, -2.0, 0.7))


def test_gripper_closed(frankie_model):
    bb = make_blackboard(frankie_model)
    assert tick(GripperClosed("closed?"), bb) == F
    bb.world = replace(bb.world, gripper_width=0.0)
    assert tick(GripperClosed("closed?"), bb) == S


def test_distance_to_goal_threshold(frankie_model):
    bb = make_blackboard(frankie_model)
    assert tick(DistanceToGoal("near?", 0.25), bb) == F

    bb.goal_pose = Pose3.trans(0.24, 0.0, 0.0) @ bb.end_effector()
    assert tick(DistanceToGoal("near?", 0.25), bb) == S
    bb.goal_pose = Pose3.trans(0.0, 0.26, 0.0) @ bb.end_effector()
    assert tick(DistanceToGoal("near?", 0.25), bb) == F

    with pytest.raises(ValueError):
        DistanceToGoal("bad", 0.0)


def test_load_and_publish_pose(frankie_model):
    bb = make_blackboard(frankie_model)
    assert tick(PublishPose("publish"), bb) == F
    assert tick(LoadPose("load", "nowhere"), bb) == F

    assert tick(LoadPose("load", "pickup"), bb) == S
    assert bb.goal_pose is None
    assert tick(PublishPose("publish"), bb) == S
    assert bb.goal_pose.is_close(bb.named_poses["pickup"])


def test_close_gripper_captures_nearby_object(frankie_model):
    bb = make_blackboard(frankie_model)
    position = bb.end_effector().translation + np.array([0.02, 0.0, 0.0])
    bb.world = replace(bb.world, objects=(WorldObject(id=4, pose=Pose3.trans(*position)),))
    bb.current_grasp = GraspAttempt(4, Pose3.trans(*position))

    assert tick(CloseGripper("close"), bb) == S
    assert bb.world.held_object == 4
    assert bb.world.gripper_width == pytest.approx(0.04)
    assert bb.current_grasp is None
    assert bb.stats.grasp_times == [0.0]
    assert tick(GripperClosed("closed?"), bb) == F


def test_close_gripper_misses_far_object(frankie_model):
    bb = make_blackboard(frankie_model)
    position = bb.end_effector().translation + np.array([0.1, 0.0, 0.0])
    bb.world = replace(bb.world, objects=(WorldObject(id=0, pose=Pose3.trans(*position)),))
    bb.current_grasp = GraspAttempt(0, Pose3.trans(*position))

    assert tick(CloseGripper("close"), bb) == S
    assert bb.world.held_object is None
    assert tick(GripperClosed("closed?"), bb) == S


def test_open_gripper_places_held_object(frankie_model):
    bb = make_blackboard(frankie_model, objects=[WorldObject(id=0, pose=Pose3.trans(2.0, 0.0, 0.5))])
    bb.world = replace(bb.world, held_object=0, gripper_width=0.04, time=3.0)
    bb.stats.cycle_start = 1.0

    assert tick(OpenGripper("open"), bb) == S
    assert bb.world.held_object is None
    assert bb.world.gripper_width == pytest.approx(0.08)
    assert bb.world.find_object(0).pose.translation == pytest.approx(bb.end_effector().translation)
    assert bb.stats.placements == 1
    assert bb.stats.pick_place_times == [pytest.approx(2.0)]
    assert bb.stats.cycle_start == pytest.approx(3.0)


def test_open_gripper_without_object_just_opens(frankie_model):
    bb = make_blackboard(frankie_model)
    bb.world = replace(bb.world, gripper_width=0.0)
    assert tick(OpenGripper("open"), bb) == S
    assert bb.world.gripper_width == pytest.approx(0.08)
    assert bb.stats.placements == 0


def test_arm_error_and_recovery(frankie_model):
    controller = MagicMock()
    bb = make_blackboard(frankie_model, controller=controller)
    assert tick(ArmError("error?"), bb) == F

    bb.world = replace(bb.world, arm_error=True)
    bb.goal_pose = bb.end_effector()
    assert tick(ArmError("error?"), bb) == S
    assert tick(RecoverArm("recover"), bb) == S
    assert not bb.world.arm_error
    assert bb.goal_pose is None
    assert bb.stats.recovered_errors == 1
    controller.reset.assert_called_once()


def test_base_to_pose_drives_the_base(frankie_model):
    bb = make_blackboard(frankie_model, named_poses={"spot": Pose3.planar(1.0, 0.0, 0.0)})
    ready = bb.world.q_a.copy()
    status = tick(BaseToPose("to spot", "spot"), bb)
    assert status == R
    assert bb.world.base_pose[0] > 0.0

    leaf = BaseToPose("to spot", "spot")
    for _ in range(600):
        status = tick(leaf, bb)
        if status == S:
            break
    assert status == S
    assert np.hypot(bb.world.base_pose[0] - 1.0, bb.world.base_pose[1]) <= 0.02
    assert bb.world.q_a == pytest.approx(ready)


def test_arm_to_config_returns_to_ready(frankie_model):
    bb = make_blackboard(frankie_model)
    q_a = frankie_model.ready.copy()
    q_a[0] += 0.3
    bb.world = replace(bb.world, q_a=q_a)

    leaf = ArmToConfig("ready", "ready")
    statuses = [tick(leaf, bb) for _ in range(20)]
    assert S in statuses
    assert bb.world.q_a == pytest.approx(frankie_model.ready, abs=1e-3)
    assert bb.world.base_pose == pytest.approx([0.0, 0.0, 0.0])

    with pytest.raises(ValueError):
        ArmToConfig("bad", "ready", speed_fraction=0.0)


def test_arm_to_config_clamp_counts_a_raised_error(frankie_model):
    bb = make_blackboard(frankie_model)
    bb.named_configurations["beyond"] = bb.world.q_max + 0.2

    leaf = ArmToConfig("beyond", "beyond", speed_fraction=1.0)
    statuses = [tick(leaf, bb) for _ in range(40)]
    assert F in statuses
    assert bb.world.arm_error
    assert bb.stats.raised_errors == 1

    assert tick(RecoverArm("recover"), bb) == S
    assert bb.stats.recovered_errors == 1
    assert bb.stats.raised_errors >= bb.stats.recovered_errors


def test_motion_control_succeeds_at_goal_without_moving(frankie_model):
    controller = MagicMock()
    bb = make_blackboard(frankie_model, controller=controller)
    bb.goal_pose = bb.end_effector()
    assert tick(MotionControl("reach"), bb) == S
    controller.execute.assert_not_called()


def test_motion_control_track_mode_keeps_running(frankie_model):
    controller = MagicMock()
    controller.execute.return_value = ControlCommand.base_only(frankie_model, 0.0, 0.0)
    bb = make_blackboard(frankie_model, controller=controller)
    bb.goal_pose = bb.end_effector()
    assert tick(MotionControl("track", track=True), bb) == R
    assert controller.execute.call_count == bb.steps_per_tick
    assert bb.world.time == pytest.approx(0.05)


def test_motion_control_without_goal_fails(frankie_model):
    bb = make_blackboard(frankie_model, controller=MagicMock())
    assert tick(MotionControl("reach"), bb) == F


def test_motion_control_failure_raises_arm_error(frankie_model):
    controller = MagicMock()
    controller.execute.side_effect = ControllerFailureException("infeasible", solver_status="infeasible")
    bb = make_blackboard(frankie_model, controller=controller)
    bb.goal_pose = Pose3.trans(0.5, 0.0, 0.0) @ bb.end_effector()
    assert tick(MotionControl("reach"), bb) == F
    assert bb.world.arm_error
    assert bb.stats.raised_errors == 1


def test_subscribe_grasp_pose_picks_nearest_object(frankie_model):
    objects = [
        WorldObject(id=0, pose=Pose3.trans(2.3, 0.0, 0.5)),
        WorldObject(id=1, pose=Pose3.trans(2.05, 0.0, 0.5)),
        WorldObject(id=2, pose=Pose3.trans(5.0, 0.0, 0.5)),
    ]
    bb = make_blackboard(frankie_model, objects=objects, grasp_source=ScriptedGraspSource())
    leaf = SubscribeGraspPose("subscribe")
    assert tick(leaf, bb) == S
    assert bb.current_grasp.object_id == 1
    assert bb.stats.attempts == 1
    assert not bb.current_grasp.missed
    assert bb.loaded_pose.translation == pytest.approx([2.05, 0.0, 0.5])
    assert bb.loaded_pose.rotation == pytest.approx(bb.named_poses["pickup"].rotation)

    proposal = bb.current_grasp
    assert tick(leaf, bb) == S
    assert bb.current_grasp is proposal
    assert bb.stats.attempts == 1


def test_subscribe_grasp_pose_fails_without_candidates(frankie_model):
    far = [WorldObject(id=0, pose=Pose3.trans(5.0, 0.0, 0.5))]
    assert tick(SubscribeGraspPose("subscribe"), make_blackboard(frankie_model, objects=far)) == F
    bb = make_blackboard(frankie_model, objects=far, grasp_source=ScriptedGraspSource())
    assert tick(SubscribeGraspPose("subscribe"), bb) == F


def test_missed_grasp_is_offset_in_the_plane(frankie_model):
    world = WorldState.create(frankie_model, objects=[WorldObject(id=0, pose=Pose3.trans(2.0, 0.0, 0.5))])
    attempt = ScriptedGraspSource(failure_probability=1.0).propose(
        world, Pose3.trans(2.0, 0.0, 0.75), np.random.default_rng(0)
    )
    assert attempt.missed
    offset = attempt.pose.translation - np.array([2.0, 0.0, 0.5])
    assert np.hypot(offset[0], offset[1]) == pytest.approx(0.08)
    assert offset[2] == pytest.approx(0.0)


def test_grasp_failure_rate_matches_probability():
    source = ScriptedGraspSource(failure_probability=0.115)
    rng = np.random.default_rng(2024)
    misses = sum(source.draw_miss(rng) for _ in range(1000))
    sigma = np.sqrt(1000 * 0.115 * 0.885)
    assert abs(misses - 115) <= 3 * sigma


def test_grasp_source_validation():
    with pytest.raises(ValueError):
        ScriptedGraspSource(failure_probability=1.5)
    with pytest.raises(ValueError):
        ScriptedGraspSource(miss_offset=0.0)


def test_activations_are_recorded_in_world_time(frankie_model):
    bb = make_blackboard(frankie_model)
    tick(AlwaysSuccess("noop"), bb)
    assert [(a.behaviour, a.moves_robot) for a in bb.timeline] == [("noop", False)]


def test_max_idle_gap(frankie_model):
    bb = make_blackboard(frankie_model)
    assert bb.max_idle_gap() == 0.0
    bb.record_activation("drive", 0.0, 1.0, True)
    bb.record_activation("check", 1.0, 1.0, False)
    bb.record_activation("reach", 1.05, 2.0, True)
    bb.record_activation("track", 1.5, 3.0, True)
    bb.record_activation("retreat", 3.0, 4.0, True)
    assert bb.max_idle_gap() == pytest.approx(0.05)


def test_pick_place_tree_needs_named_poses():
    with pytest.raises(TreeConstructionException) as excinfo:
        build_pick_place_tree({"init": Pose3.identity()})
    assert "pickup" in str(excinfo.value)


def test_pick_place_tree_runs_recovery_first(frankie_model):
    controller = MagicMock()
    bb = make_blackboard(frankie_model, controller=controller)
    root = build_pick_place_tree(bb.named_poses)
    bb.world = replace(bb.world, arm_error=True)

    assert tick(root, bb) == S
    assert not bb.world.arm_error
    assert bb.stats.recovered_errors == 1
    assert bb.stats.attempts == 0
    controller.execute.assert_not_called()
