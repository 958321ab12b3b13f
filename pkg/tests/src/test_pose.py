import numpy as np
import pytest

from src.entities.value_objects.pose import (
    Pose3,
    Twist,
    adjoint_rotation,
    compose,
    exp_twist,
    inverse,
    psi,
    rotation_log,
)


def random_pose(rng):
    return Pose3.from_xyz_rpy(rng.uniform(-2, 2, 3), rng.uniform(-np.pi, np.pi, 3))


def test_compose_matches_homogeneous_product():
    rng = np.random.default_rng(1)
    a, b = random_pose(rng), random_pose(rng)
    result = compose(a, b)
    assert np.allclose(result.as_matrix(), a.as_matrix() @ b.as_matrix())
    assert (a @ b).is_close(result)


def test_inverse_composes_to_identity():
    rng = np.random.default_rng(2)
    for _ in range(20):
        pose = random_pose(rng)
        assert (pose @ inverse(pose)).is_close(Pose3.identity(), atol=1e-12)
        assert (inverse(pose) @ pose).is_close(Pose3.identity(), atol=1e-12)


def test_compose_is_associative():
    rng = np.random.default_rng(3)
    a, b, c = random_pose(rng), random_pose(rng), random_pose(rng)
    assert ((a @ b) @ c).is_close(a @ (b @ c), atol=1e-12)


def test_psi_of_pure_translation():
    twist = psi(Pose3.trans(1, 2, 3))
    assert np.allclose(twist.as_array(), [1, 2, 3, 0, 0, 0])


def test_psi_of_rotation_about_z():
    twist = psi(Pose3.rot_z(np.pi / 2))
    assert np.allclose(twist.as_array(), [0, 0, 0, 0, 0, np.pi / 2])


def test_psi_at_pi_makes_largest_axis_component_positive():
    rotvec = rotation_log(Pose3.rot_z(np.pi).rotation)
    assert np.allclose(rotvec, [0, 0, np.pi])
    rotvec = rotation_log(Pose3.rot_z(-np.pi).rotation)
    assert np.allclose(rotvec, [0, 0, np.pi])


def test_exp_inverts_psi():
    rng = np.random.default_rng(4)
    for _ in range(20):
        pose = random_pose(rng)
        assert exp_twist(psi(pose)).is_close(pose, atol=1e-10)


def test_psi_of_identity_is_zero():
    assert psi(Pose3.identity()).norm() == 0.0


def test_pose_rejects_non_rotation():
    with pytest.raises(ValueError):
        Pose3(rotation=np.diag([1.0, 1.0, 2.0]))
    with pytest.raises(ValueError):
        Pose3(rotation=np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        Pose3(translation=np.array([np.nan, 0.0, 0.0]))


def test_pose_renormalises_small_drift():
    drifted = Pose3.rot_z(0.3).rotation * (1 + 1e-5)
    pose = Pose3(rotation=drifted)
    assert np.allclose(pose.rotation.T @ pose.rotation, np.eye(3), atol=1e-12)


def test_from_matrix_rejects_wrong_shape():
    with pytest.raises(ValueError):
        Pose3.from_matrix(np.eye(3))


def test_twist_create_and_scaled():
    twist = Twist.create([1, 2, 3, 4, 5, 6])
    assert np.allclose(twist.linear, [1, 2, 3])
    assert np.allclose(twist.scaled(2).angular, [8, 10, 12])
    with pytest.raises(ValueError):
        Twist.create([1, 2, 3])


def test_adjoint_rotation_is_block_diagonal():
    rotation = Pose3.rot_z(0.4).rotation
    adjoint = adjoint_rotation(rotation)
    assert np.allclose(adjoint[:3, :3], rotation)
    assert np.allclose(adjoint[3:, 3:], rotation)
    assert np.allclose(adjoint[:3, 3:], 0)
