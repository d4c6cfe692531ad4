import math

import numpy as np
import pytest

from globalhand.camera import project_point
from globalhand.canonical import canonicalize
from globalhand.core import MMCP, WRIST, Handedness, Skeleton, bone_lengths_of, validate_pose
from globalhand.recon import reconstruct_global
from globalhand.synth import NoiseModel, SynthParams, perturb, sample_frames, sample_pose, sample_sequence

from conftest import random_poses


def test_key_bone_is_ten_cm():
    for pose in random_poses(100, seed=0):
        assert abs(np.linalg.norm(pose.joints[WRIST] - pose.joints[MMCP]) - 10.0) < 1e-9


def test_generated_poses_valid():
    sk = Skeleton()
    for pose in random_poses(500, seed=1):
        assert validate_pose(pose).ok
        np.testing.assert_allclose(bone_lengths_of(pose, sk), sk.reference_lengths, atol=1e-9)


def test_roots_inside_frustum_box():
    params = SynthParams()
    for pose in random_poses(300, seed=2):
        assert 25.0 <= pose.root[2] <= 100.0
        rc = project_point(pose.root, params.camera)
        assert np.all((rc >= 0.1 - 1e-12) & (rc <= 0.9 + 1e-12))


def test_drop_rate():
    params = SynthParams(seed=3)
    rng = np.random.default_rng(3)
    absent = sum(sample_pose(params, Handedness.LEFT, rng) is None for _ in range(10_000))
    assert abs(absent / 10_000 - 0.1) <= 0.01


def test_sample_pose_deterministic():
    a = sample_pose(SynthParams(seed=5, drop_rate=0.0))
    b = sample_pose(SynthParams(seed=5, drop_rate=0.0))
    assert a.joints.tobytes() == b.joints.tobytes()
    frames_a = sample_frames(SynthParams(seed=6), 20)
    frames_b = sample_frames(SynthParams(seed=6), 20)
    for (la, ra), (lb, rb) in zip(frames_a, frames_b):
        for x, y in ((la, lb), (ra, rb)):
            assert (x is None and y is None) or x.joints.tobytes() == y.joints.tobytes()


def test_left_hand_mirrors_right():
    params = SynthParams(seed=7, drop_rate=0.0)
    left = sample_pose(params, Handedness.LEFT)
    right = sample_pose(params, Handedness.RIGHT)
    assert left.side is Handedness.LEFT
    np.testing.assert_allclose(bone_lengths_of(left), bone_lengths_of(right), atol=1e-12)
    assert not np.allclose(left.joints, right.joints)


def test_single_frame_sequence():
    seq = sample_sequence(SynthParams(seed=1), 1)
    assert len(seq) == 1 and validate_pose(seq[0].left).ok and validate_pose(seq[0].right).ok


def test_sequence_continuity_and_validity():
    seq = sample_sequence(SynthParams(seed=8), 500)
    assert len(seq) == 500
    for side in ("left", "right"):
        roots = np.array([getattr(f, side).root for f in seq])
        assert np.linalg.norm(np.diff(roots, axis=0), axis=1).max() <= 2.0 + 1e-9
        assert all(validate_pose(getattr(f, side)).ok for f in seq)


def test_sequence_deterministic():
    a = sample_sequence(SynthParams(seed=9), 60)
    b = sample_sequence(SynthParams(seed=9), 60)
    assert all(x.right.joints.tobytes() == y.right.joints.tobytes() for x, y in zip(a, b))


def test_zero_noise_perturb_is_exact(cam):
    for pose in random_poses(100, seed=10):
        p, can = perturb(pose, cam, NoiseModel())
        np.testing.assert_array_equal(p.joints, project_point(pose.joints, cam))
        np.testing.assert_array_equal(can.joints, canonicalize(pose, cam).canonical.joints)
        result = reconstruct_global(can, p, cam, 10.0)
        assert np.abs(result.pose.joints - pose.joints).max() < 1e-6


def test_noisy_canonical_keeps_invariants(cam):
    rng = np.random.default_rng(11)
    for pose in random_poses(50, seed=11):
        _, can = perturb(pose, cam, NoiseModel(0.0, 0.05), rng)
        assert np.abs(can.joints[MMCP]).max() < 1e-12
        assert abs(np.linalg.norm(can.joints[WRIST]) - 1) < 1e-12


def test_noise_statistics_match_gaussian_model(cam):
    sigma = 0.005
    rng = np.random.default_rng(12)
    poses = random_poses(1000, seed=12)
    row_err, col_err = [], []
    for pose in poses:
        p, _ = perturb(pose, cam, NoiseModel(sigma, 0.0), rng)
        d = p.joints - project_point(pose.joints, cam)
        row_err.append(np.abs(d[:, 0]) * cam.height_px)
        col_err.append(np.abs(d[:, 1]) * cam.width_px)
    expected_row = sigma * cam.height_px * math.sqrt(2 / math.pi)
    expected_col = sigma * cam.width_px * math.sqrt(2 / math.pi)
    assert np.mean(row_err) == pytest.approx(expected_row, rel=0.1)
    assert np.mean(col_err) == pytest.approx(expected_col, rel=0.1)


def test_noise_deterministic(cam):
    pose = random_poses(1, seed=13)[0]
    noise = NoiseModel(0.01, 0.02, seed=4)
    a = perturb(pose, cam, noise)
    b = perturb(pose, cam, noise)
    assert a[0].joints.tobytes() == b[0].joints.tobytes()
    assert a[1].joints.tobytes() == b[1].joints.tobytes()


def test_params_validation():
    with pytest.raises(ValueError):
        SynthParams(depth_range=(50.0, 20.0))
    with pytest.raises(ValueError):
        SynthParams(drop_rate=1.5)
    with pytest.raises(ValueError):
        NoiseModel(sigma_2d=-1.0)
