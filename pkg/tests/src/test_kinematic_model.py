from dataclasses import replace

import numpy as np
import pytest

from src.entities.kinematic_model import (
    BaseKind,
    Configuration,
    FixedElement,
    JacobianFrame,
    JointDesc,
    JointKind,
    KinematicModel,
    ManipulabilityVariant,
    inverse_wheel_map,
    manipulability,
    wheel_map,
)
from src.entities.value_objects.pose import Pose3, adjoint_rotation, rotation_log

STEP = 1e-6


def sample_configuration(model, seed=0):
    rng = np.random.default_rng(seed)
    q_a = model.random_configuration(rng, margin=np.radians(10))
    return Configuration.create(0.3, -0.2, 0.7, q_a)


def world_end_effector(model, cfg, q_base, q_a):
    return cfg.base_transform.as_matrix() @ model.base_to_end_effector(q_a, q_base)


def finite_difference_jacobian(model, cfg):
    """World-frame geometric Jacobian by central differences over all n joints"""
    q_full = np.concatenate((np.zeros(model.n_base), cfg.q_a))
    jacobian = np.zeros((6, model.n))
    for column in range(model.n):
        plus, minus = q_full.copy(), q_full.copy()
        plus[column] += STEP
        minus[column] -= STEP
        T_plus = world_end_effector(model, cfg, plus[: model.n_base], plus[model.n_base :])
        T_minus = world_end_effector(model, cfg, minus[: model.n_base], minus[model.n_base :])
        jacobian[:3, column] = (T_plus[:3, 3] - T_minus[:3, 3]) / (2 * STEP)
        jacobian[3:, column] = rotation_log(T_plus[:3, :3] @ T_minus[:3, :3].T) / (2 * STEP)
    return jacobian


def test_bundled_model_sizes(frankie_model, omni_model):
    assert frankie_model.base_kind == BaseKind.NONHOLONOMIC
    assert (frankie_model.n_base, frankie_model.n_arm, frankie_model.n) == (2, 7, 9)
    assert frankie_model.rotation_joint_index == 0
    assert omni_model.base_kind == BaseKind.OMNIDIRECTIONAL
    assert (omni_model.n_base, omni_model.n_arm, omni_model.n) == (3, 7, 10)
    assert omni_model.rotation_joint_index == 2


def test_joint_columns_are_ordered_base_first(frankie_model):
    kinds = [joint.kind for joint in frankie_model.joints]
    assert kinds[:2] == [JointKind.VIRTUAL_BASE_ROTATION, JointKind.VIRTUAL_BASE_TRANSLATION]
    assert all(kind == JointKind.REVOLUTE for kind in kinds[2:])
    assert frankie_model.qd_max.shape == (9,)


@pytest.mark.parametrize("model_name", ["frankie_model", "omni_model"])
def test_world_jacobian_matches_finite_differences(request, model_name):
    model = request.getfixturevalue(model_name)
    for seed in range(3):
        cfg = sample_configuration(model, seed)
        analytic = model.jacobian(cfg, JacobianFrame.WORLD)
        assert np.allclose(analytic, finite_difference_jacobian(model, cfg), atol=1e-5)


def test_base_and_end_effector_frames_are_rotations_of_world(frankie_model):
    cfg = sample_configuration(frankie_model, 4)
    world = frankie_model.jacobian(cfg, JacobianFrame.WORLD)
    base = frankie_model.jacobian(cfg, JacobianFrame.BASE)
    assert np.allclose(adjoint_rotation(cfg.base_transform.rotation) @ base, world)

    end_effector = frankie_model.jacobian(cfg, JacobianFrame.END_EFFECTOR)
    world_rotation = frankie_model.fkine(cfg).rotation
    assert np.allclose(adjoint_rotation(world_rotation.T) @ world, end_effector)


def test_nonholonomic_virtual_columns(frankie_model):
    cfg = frankie_model.ready_configuration()
    jacobian = frankie_model.jacobian(cfg)
    p_end = frankie_model.base_to_end_effector(cfg.q_a)[:3, 3]
    assert np.allclose(jacobian[:3, 0], np.cross([0, 0, 1], p_end))
    assert np.allclose(jacobian[3:, 0], [0, 0, 1])
    assert np.allclose(jacobian[:, 1], [1, 0, 0, 0, 0, 0])


def test_fkine_moves_with_base(frankie_model):
    q_a = frankie_model.ready
    at_origin = frankie_model.fkine(Configuration.create(0, 0, 0, q_a))
    shifted = frankie_model.fkine(Configuration.create(1.5, -0.5, 0, q_a))
    assert np.allclose(shifted.translation - at_origin.translation, [1.5, -0.5, 0])
    turned = frankie_model.fkine(Configuration.create(0, 0, np.pi / 2, q_a))
    assert turned.is_close(Pose3.rot_z(np.pi / 2) @ at_origin, atol=1e-12)


def test_arm_only_gradient_matches_finite_differences(frankie_model):
    cfg = sample_configuration(frankie_model, 5)
    gradient = frankie_model.manipulability_jacobian(cfg, ManipulabilityVariant.ARM_ONLY)
    assert np.all(gradient[: frankie_model.n_base] == 0.0)
    for index in range(frankie_model.n_arm):
        plus, minus = cfg.q_a.copy(), cfg.q_a.copy()
        plus[index] += STEP
        minus[index] -= STEP
        expected = (
            frankie_model.manipulability(replace(cfg, q_a=plus)) - frankie_model.manipulability(replace(cfg, q_a=minus))
        ) / (2 * STEP)
        assert gradient[frankie_model.n_base + index] == pytest.approx(expected, abs=1e-6)


def test_whole_platform_gradient_matches_finite_differences_on_arm_joints(omni_model):
    cfg = sample_configuration(omni_model, 6)
    gradient = omni_model.manipulability_jacobian(cfg, ManipulabilityVariant.WHOLE_PLATFORM)
    for index in range(omni_model.n_arm):
        plus, minus = cfg.q_a.copy(), cfg.q_a.copy()
        plus[index] += STEP
        minus[index] -= STEP
        expected = (
            manipulability(omni_model.jacobian(replace(cfg, q_a=plus)))
            - manipulability(omni_model.jacobian(replace(cfg, q_a=minus)))
        ) / (2 * STEP)
        assert gradient[omni_model.n_base + index] == pytest.approx(expected, abs=1e-6)


def test_zero_variant_is_all_zeros(frankie_model):
    cfg = frankie_model.ready_configuration()
    gradient = frankie_model.manipulability_jacobian(cfg, ManipulabilityVariant.ZERO)
    assert gradient.shape == (frankie_model.n,)
    assert not gradient.any()


def test_manipulability_variant_aliases():
    assert ManipulabilityVariant.create("whole") == ManipulabilityVariant.WHOLE_PLATFORM
    assert ManipulabilityVariant.create("arm") == ManipulabilityVariant.ARM_ONLY
    with pytest.raises(ValueError):
        ManipulabilityVariant.create("elbow")


def test_manipulability_is_zero_for_rank_deficient_jacobian():
    jacobian = np.zeros((6, 7))
    jacobian[0, 0] = 1.0
    assert manipulability(jacobian) == 0.0


def test_wheel_maps_are_inverse():
    left, right = wheel_map((1.0, 0.5), 0.1, 0.5)
    assert (left, right) == pytest.approx((2.5, 7.5))
    assert inverse_wheel_map(left, right, 0.1, 0.5) == pytest.approx((1.0, 0.5))
    with pytest.raises(ValueError):
        wheel_map((1.0, 0.5), 0.0, 0.5)


def test_check_arm_rejects_wrong_length(frankie_model):
    with pytest.raises(ValueError):
        frankie_model.check_arm(np.zeros(6))


def test_model_validation():
    joint = JointDesc(JointKind.REVOLUTE, [0, 0, 1], -1.0, 1.0, 1.0, "j1")
    with pytest.raises(ValueError):
        JointDesc(JointKind.REVOLUTE, [0, 0, 1], 1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        JointDesc(JointKind.REVOLUTE, [0, 0, 0], -1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        KinematicModel(BaseKind.NONHOLONOMIC, Pose3.identity(), (FixedElement(Pose3.trans(0, 0, 1)),))
    with pytest.raises(ValueError):
        KinematicModel(BaseKind.NONHOLONOMIC, Pose3.identity(), (joint,), ready=np.array([2.0]))
    model = KinematicModel(BaseKind.OMNIDIRECTIONAL, Pose3.identity(), (joint,))
    assert model.n == 4
    assert np.allclose(model.ready, [0.0])


def test_random_configuration_respects_margin(frankie_model):
    rng = np.random.default_rng(7)
    margin = np.radians(5)
    for _ in range(50):
        q_a = frankie_model.random_configuration(rng, margin)
        assert np.all(q_a >= frankie_model.q_min + margin - 1e-12)
        assert np.all(q_a <= frankie_model.q_max - margin + 1e-12)
