"""Synthetic two-hand poses, sequences and a noisy estimator stand-in.

All randomness comes from numpy's PCG64 generator (``numpy.random.default_rng``)
seeded with the integer seed in the parameters; the same seed and numpy
release reproduce identical outputs.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .camera import DEFAULT_CAMERA, CameraIntrinsics, image_rays, project_point, rot_x, rot_y, rot_z
from .canonical import canonicalize
from .core import (
    BONES,
    FINGER_MCPS,
    MMCP,
    NUM_JOINTS,
    WRIST,
    CanonicalPose,
    Handedness,
    HandPose3D,
    Pose2D,
    Skeleton,
)

RNG_ALGORITHM = "PCG64"

_DEG = math.pi / 180.0

DEFAULT_ANGLE_RANGES = {
    "abduction": (-20 * _DEG, 20 * _DEG),
    "mcp_flexion": (0.0, 90 * _DEG),
    "pip_flexion": (0.0, 110 * _DEG),
    "dip_flexion": (0.0, 80 * _DEG),
    "thumb_abduction": (-25 * _DEG, 25 * _DEG),
    "thumb_flexion": (0.0, 60 * _DEG),
    "yaw": (-math.pi, math.pi),
    "pitch": (-math.pi / 2, math.pi / 2),
    "roll": (-math.pi, math.pi),
}

# right hand, local frame: palm in the x-y plane, fingers toward +y, thumb on -x,
# palm facing -z; left hands mirror x
_MCP_DIRECTIONS = np.array(
    [
        [-3.0, 4.0, -1.0],
        [-2.2, 9.6, 0.0],
        [0.0, 1.0, 0.0],
        [2.0, 9.2, 0.0],
        [3.8, 8.3, 0.0],
    ]
)
_MCP_DIRECTIONS /= np.linalg.norm(_MCP_DIRECTIONS, axis=1, keepdims=True)
_PALM_NORMAL = np.array([0.0, 0.0, -1.0])
_THUMB_FORWARD = np.array([-0.6, 1.0, -0.3])
_THUMB_NORMAL = np.array([0.6, 0.2, -1.0])

# angle vector layout: per finger (abduction, mcp, pip, dip), then yaw, pitch, roll
_ANGLE_NAMES = (
    ("thumb_abduction", "thumb_flexion", "thumb_flexion", "thumb_flexion")
    + ("abduction", "mcp_flexion", "pip_flexion", "dip_flexion") * 4
    + ("yaw", "pitch", "roll")
)
_N_FINGER_ANGLES = 4 * len(FINGER_MCPS)


@dataclass(frozen=True)
class SynthParams:
    seed: int = 0
    depth_range: tuple[float, float] = (25.0, 100.0)
    image_margin: float = 0.1
    angle_ranges: dict = field(default_factory=lambda: dict(DEFAULT_ANGLE_RANGES))
    drop_rate: float = 0.1
    skeleton: Skeleton = field(default_factory=Skeleton)
    camera: CameraIntrinsics = DEFAULT_CAMERA
    max_step_cm: float = 2.0
    keypose_interval: int = 30

    def __post_init__(self):
        lo, hi = self.depth_range
        if not 0 < lo <= hi:
            raise ValueError("depth range must be positive and ordered")
        if not 0 <= self.drop_rate <= 1:
            raise ValueError("drop_rate must lie in [0, 1]")
        if not 0 <= self.image_margin < 0.5:
            raise ValueError("image_margin must lie in [0, 0.5)")
        if self.max_step_cm <= 0 or self.keypose_interval < 1:
            raise ValueError("max_step_cm and keypose_interval must be positive")


@dataclass(frozen=True)
class NoiseModel:
    sigma_2d: float = 0.0
    sigma_can: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_2d < 0 or self.sigma_can < 0:
            raise ValueError("noise sigmas must be non-negative")


class SequenceFrame(NamedTuple):
    frame: int
    left: HandPose3D
    right: HandPose3D


def _finger_frames() -> np.ndarray:
    """Per finger: unit forward direction, flexion direction, abduction direction."""
    frames = np.zeros((len(FINGER_MCPS), 3, 3))
    for i in range(len(FINGER_MCPS)):
        forward, normal = (_THUMB_FORWARD, _THUMB_NORMAL) if i == 0 else (_MCP_DIRECTIONS[i], _PALM_NORMAL)
        f = forward / np.linalg.norm(forward)
        n = normal - f * (normal @ f)
        n /= np.linalg.norm(n)
        frames[i] = f, n, np.cross(n, f)
    return frames


_FINGER_FRAMES = _finger_frames()


@functools.lru_cache(maxsize=16)
def _skeleton_geometry(skeleton: Skeleton) -> tuple[np.ndarray, np.ndarray]:
    """MCP offsets from the wrist and the (finger, segment) length table."""
    lengths = skeleton.reference_lengths
    seg = np.array([[lengths[BONES.index((m + k, m + k + 1))] for k in range(3)] for m in FINGER_MCPS])
    base = _MCP_DIRECTIONS * np.array([lengths[BONES.index((WRIST, m))] for m in FINGER_MCPS])[:, None]
    return base, seg


def forward_kinematics(angles: np.ndarray, skeleton: Skeleton, side: Handedness) -> np.ndarray:
    """Hand-local joint positions from finger angles (yaw/pitch/roll ignored).

    Each finger is planar: abduction turns its forward direction about the
    palm normal, then cumulative flexion bends every segment toward the palm.
    """
    per_finger = np.asarray(angles[:_N_FINGER_ANGLES]).reshape(-1, 4)
    abd = per_finger[:, 0:1]
    bend = np.cumsum(per_finger[:, 1:], axis=1)
    f, n, side_axis = _FINGER_FRAMES[:, 0], _FINGER_FRAMES[:, 1], _FINGER_FRAMES[:, 2]
    f = np.cos(abd) * f + np.sin(abd) * side_axis
    # (finger, segment, xyz)
    directions = np.cos(bend)[..., None] * f[:, None, :] + np.sin(bend)[..., None] * n[:, None, :]
    base, seg = _skeleton_geometry(skeleton)
    chain = base[:, None, :] + np.cumsum(directions * seg[..., None], axis=1)

    local = np.zeros((NUM_JOINTS, 3))
    mcps = np.array(FINGER_MCPS)
    local[mcps] = base
    for k in range(3):
        local[mcps + k + 1] = chain[:, k]
    if Handedness(side) is Handedness.LEFT:
        local[:, 0] *= -1.0
    return local


def _orientation(yaw: float, pitch: float, roll: float) -> np.ndarray:
    return rot_z(roll) @ rot_x(pitch) @ rot_y(yaw)


def _place(angles: np.ndarray, root: np.ndarray, skeleton: Skeleton, side: Handedness) -> HandPose3D:
    local = forward_kinematics(angles, skeleton, side)
    rotation = _orientation(*angles[_N_FINGER_ANGLES:])
    return HandPose3D((local - local[MMCP]) @ rotation.T + root, side)


def _sample_angles(params: SynthParams, rng: np.random.Generator) -> np.ndarray:
    r = params.angle_ranges
    lo = np.array([r[n][0] for n in _ANGLE_NAMES])
    hi = np.array([r[n][1] for n in _ANGLE_NAMES])
    return rng.uniform(lo, hi)


def _sample_root(params: SynthParams, rng: np.random.Generator) -> np.ndarray:
    m = params.image_margin
    rc = rng.uniform(m, 1.0 - m, size=2)
    depth = rng.uniform(*params.depth_range)
    ray = image_rays(rc, params.camera)
    return ray * depth / ray[2]


def sample_pose(
    params: SynthParams,
    side: Handedness = Handedness.RIGHT,
    rng: Optional[np.random.Generator] = None,
) -> Optional[HandPose3D]:
    """Random pose, or ``None`` with probability ``drop_rate``.

    Without ``rng`` a fresh generator seeded by ``params.seed`` is used, so
    repeated calls return the same pose; pass a shared generator for a stream.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    if rng.random() < params.drop_rate:
        return None
    angles = _sample_angles(params, rng)
    root = _sample_root(params, rng)
    return _place(angles, root, params.skeleton, side)


def sample_frames(params: SynthParams, n_frames: int) -> list[tuple[Optional[HandPose3D], Optional[HandPose3D]]]:
    """Independent static frames of (left, right) hands, each dropped at ``drop_rate``."""
    rng = np.random.default_rng(params.seed)
    return [
        (sample_pose(params, Handedness.LEFT, rng), sample_pose(params, Handedness.RIGHT, rng))
        for _ in range(n_frames)
    ]


def _smoothstep(t):
    return t * t * (3.0 - 2.0 * t)


def _trajectory(params: SynthParams, side: Handedness, n_frames: int, rng: np.random.Generator) -> list[HandPose3D]:
    angles = _sample_angles(params, rng)
    root = _sample_root(params, rng)
    poses = [_place(angles, root, params.skeleton, side)]
    # smoothstep has peak slope 1.5, so this segment length keeps every step under max_step_cm
    while len(poses) < n_frames:
        next_angles = _sample_angles(params, rng)
        next_root = _sample_root(params, rng)
        distance = float(np.linalg.norm(next_root - root))
        steps = max(params.keypose_interval, math.ceil(1.5 * distance / params.max_step_cm))
        for k in range(1, steps + 1):
            s = _smoothstep(k / steps)
            poses.append(
                _place(angles + s * (next_angles - angles), root + s * (next_root - root), params.skeleton, side)
            )
            if len(poses) == n_frames:
                break
        angles, root = next_angles, next_root
    return poses


def sample_sequence(params: SynthParams, n_frames: int = 500) -> list[SequenceFrame]:
    """Two-hand sequence with smooth, independent motion per hand; hands are never dropped."""
    if n_frames < 1:
        raise ValueError("n_frames must be at least 1")
    rng = np.random.default_rng(params.seed)
    left = _trajectory(params, Handedness.LEFT, n_frames, rng)
    right = _trajectory(params, Handedness.RIGHT, n_frames, rng)
    return [SequenceFrame(i, l, r) for i, (l, r) in enumerate(zip(left, right))]


def perturb(
    gt_pose: HandPose3D,
    cam: CameraIntrinsics = DEFAULT_CAMERA,
    noise: NoiseModel = NoiseModel(),
    rng: Optional[np.random.Generator] = None,
) -> tuple[Pose2D, CanonicalPose]:
    """Exact 2D and canonical poses plus independent Gaussian noise.

    The noisy canonical pose is re-centered on the mMCP and rescaled so the
    wrist again sits at unit distance.
    """
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    p = project_point(gt_pose.joints, cam)
    can = canonicalize(gt_pose, cam).canonical.joints
    p = p + rng.normal(0.0, noise.sigma_2d, size=p.shape) if noise.sigma_2d > 0 else p
    if noise.sigma_can > 0:
        can = can + rng.normal(0.0, noise.sigma_can, size=can.shape)
        can = can - can[MMCP]
        can = can / np.linalg.norm(can[WRIST])
    return Pose2D(p, gt_pose.side), CanonicalPose(can, gt_pose.side)

