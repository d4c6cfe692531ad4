import numpy as np
import pytest

from globalhand.camera import centering_rotation, image_rays, project_point, rot_x, rot_y
from globalhand.canonical import canonicalize
from globalhand.core import MMCP, NUM_JOINTS, PINKY_MCP, WRIST, CanonicalPose, HandPose3D, Pose2D
from globalhand.errors import (
    DegenerateGeometryError,
    DegenerateKeyBoneError,
    InconsistentInputsError,
)
from globalhand.recon import reconstruct_global, root_radius, select_key_bone

from conftest import random_poses


def _pose(mmcp, wrist, pinky=(4.0, -1.0, 41.0)):
    j = np.tile([2.0, 3.0, 45.0], (NUM_JOINTS, 1)) + np.arange(NUM_JOINTS)[:, None] * 0.1
    j[MMCP], j[WRIST], j[PINKY_MCP] = mmcp, wrist, pinky
    return HandPose3D(j)


def _inputs(pose, cam):
    return canonicalize(pose, cam).canonical, Pose2D(project_point(pose.joints, cam), pose.side)


def test_select_key_bone_examples(cam):
    rc = np.full((NUM_JOINTS, 2), 0.5)
    rc[WRIST] = (0.5 + 30 / cam.height_px, 0.5)
    rc[PINKY_MCP] = (0.5, 0.5 + 45 / cam.width_px)
    choice = select_key_bone(Pose2D(rc), cam)
    assert choice.secondary == PINKY_MCP and choice.h2d_px == pytest.approx(45)

    rc[PINKY_MCP] = (0.5, 0.5 + 30 / cam.width_px)
    assert select_key_bone(Pose2D(rc), cam).secondary == WRIST

    rc[WRIST] = (0.5 + 1.5 / cam.height_px, 0.5)
    rc[PINKY_MCP] = (0.5, 0.5 - 1.9 / cam.width_px)
    with pytest.raises(DegenerateKeyBoneError):
        select_key_bone(Pose2D(rc), cam)


def test_root_radius_on_axis_example(cam):
    pose = _pose((0, 0, 50), (0, -10, 50), (4, -1, 50))
    can, p = _inputs(pose, cam)
    np.testing.assert_allclose(can.joints[WRIST], [0, -1, 0], atol=1e-15)
    # 2D wrist sits 0.6 cm above center: foc * -10 / 50
    assert (p.joints[WRIST, 0] * 270 - 135) / 120 == pytest.approx(-0.6, abs=1e-12)
    assert root_radius(can, p, cam, 10.0, WRIST) == pytest.approx(50.0, abs=1e-12)


def test_root_radius_tilted_bone_example(cam):
    pose = _pose((0, 0, 40), (0, -8, 46), (4, -1, 41))
    can, p = _inputs(pose, cam)
    np.testing.assert_allclose(can.joints[WRIST], [0, -0.8, 0.6], atol=1e-15)
    assert root_radius(can, p, cam, 10.0, WRIST) == pytest.approx(40.0, abs=1e-12)


def test_root_radius_collinear_secondary(cam):
    pose = _pose((0, 0, 50), (0, 0, 60), (4, -1, 50))
    can, p = _inputs(pose, cam)
    with pytest.raises(DegenerateGeometryError):
        root_radius(can, p, cam, 10.0, WRIST)


def test_root_radius_inconsistent(cam):
    pose = _pose((0, 0, 50), (0, -10, 50))
    can, p = _inputs(pose, cam)
    # a wrist claimed to lie far behind the mMCP pushes the implied root behind the camera
    j = can.joints.copy()
    j[WRIST] = (0, -0.01, 60.0)
    with pytest.raises(InconsistentInputsError):
        root_radius(CanonicalPose(j), p, cam, 10.0, WRIST)


def test_reconstruct_on_axis_exact(cam):
    pose = _pose((0, 0, 50), (0, -10, 50), (4, -1, 50))
    result = reconstruct_global(*_inputs(pose, cam), cam, 10.0)
    np.testing.assert_allclose(result.pose.root, [0, 0, 50], atol=1e-12)
    np.testing.assert_allclose(result.pose.joints[WRIST], [0, -10, 50], atol=1e-12)
    assert result.root_spherical == pytest.approx((50.0, 0.0, 0.0))


def test_reconstruct_round_trip(cam, poses_200):
    for pose in poses_200:
        result = reconstruct_global(*_inputs(pose, cam), cam, canonicalize(pose, cam).d)
        assert np.abs(result.pose.joints - pose.joints).max() < 1e-6
        assert abs(np.linalg.norm(result.pose.root) - result.root_spherical.r) < 1e-9
        assert result.pose.side == pose.side


def test_reconstruct_wrong_length_scales_pose(cam, poses_200):
    for pose in poses_200[:50]:
        can, p = _inputs(pose, cam)
        result = reconstruct_global(can, p, cam, 20.0)
        np.testing.assert_allclose(result.pose.joints, pose.joints * 2, atol=1e-6)


def test_root_radius_linear_in_length(cam, poses_200):
    for pose in poses_200[:50]:
        can, p = _inputs(pose, cam)
        s = select_key_bone(p, cam).secondary
        r1 = root_radius(can, p, cam, 1.0, s)
        for L in (0.5, 3.0, 10.0, 37.0):
            assert abs(root_radius(can, p, cam, L, s) - L * r1) <= 1e-12 * L * r1


def test_reconstruct_falls_back_to_other_bone(cam, monkeypatch):
    from globalhand import recon

    pose = _pose((0, 0, 50), (0, 0, 60), (4, -1, 50))  # wrist on the root ray
    can, p = _inputs(pose, cam)
    monkeypatch.setattr(recon, "select_key_bone", lambda p, cam: recon.KeyBoneChoice(WRIST, 0.0))
    result = recon.reconstruct_global(can, p, cam, 10.0)
    assert result.key_bone.secondary == PINKY_MCP
    np.testing.assert_allclose(result.pose.joints, pose.joints, atol=1e-9)


def test_reconstruct_both_bones_collinear(cam):
    pose = _pose((0, 0, 50), (0, 0, 60), (0, 0, 46))
    can, p = _inputs(pose, cam)
    with pytest.raises(DegenerateKeyBoneError):
        reconstruct_global(can, p, cam, 10.0)


def test_reconstruct_absent_hand(cam):
    assert reconstruct_global(None, None, cam) is None


def test_viewpoint_invariance(cam):
    rng = np.random.default_rng(9)
    for pose in random_poses(200, seed=9, depth_range=(30.0, 60.0)):
        r = rot_x(rng.uniform(-0.3, 0.3)) @ rot_y(rng.uniform(-0.4, 0.4))
        rotated = HandPose3D(pose.joints @ r.T, pose.side)
        if not np.all(rotated.joints[:, 2] > 0):
            continue
        result = reconstruct_global(*_inputs(rotated, cam), cam, 10.0)
        assert np.abs(result.pose.joints - rotated.joints).max() < 1e-6


def test_key_bone_guarantee(cam):
    ok = 0
    for pose in random_poses(2000, seed=12):
        can, p = _inputs(pose, cam)
        r = centering_rotation(p.joints[MMCP], cam)
        h = [np.hypot(*(r @ image_rays(p.joints[s], cam))[:2]) for s in (WRIST, PINKY_MCP)]
        ok += max(h) > 1e-4 * cam.foc_cm
    assert ok == 2000
