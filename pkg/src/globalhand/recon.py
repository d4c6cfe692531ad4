"""Absolute 3D pose from a 2D pose, a canonical pose and one known bone length.

The mMCP is the root.  Its viewing direction comes from its image position;
its distance from the camera comes from the key bone (mMCP to wrist or to
pinky MCP) by similar triangles in the view-centered frame.
"""
from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .camera import (
    DEFAULT_CAMERA,
    CameraIntrinsics,
    SphericalPoint,
    centering_rotation,
    image_rays,
    spherical_angles,
)
from .core import MMCP, PINKY_MCP, WRIST, CanonicalPose, HandPose3D, Pose2D
from .errors import (
    DegenerateGeometryError,
    DegenerateKeyBoneError,
    DomainError,
    InconsistentInputsError,
    InvalidPoseError,
)

KEY_BONE_CANDIDATES = (WRIST, PINKY_MCP)
MIN_KEY_BONE_PX = 2.0
MIN_H2D = 1e-9


class KeyBoneChoice(NamedTuple):
    secondary: int
    h2d_px: float


class ReconstructionResult(NamedTuple):
    pose: HandPose3D
    root_spherical: SphericalPoint
    key_bone: KeyBoneChoice


def _pixel_distance(p: np.ndarray, a: int, b: int, cam: CameraIntrinsics) -> float:
    d_row = (p[a, 0] - p[b, 0]) * cam.height_px
    d_col = (p[a, 1] - p[b, 1]) * cam.width_px
    return float(np.hypot(d_row, d_col))


def select_key_bone(p: Pose2D, cam: CameraIntrinsics = DEFAULT_CAMERA) -> KeyBoneChoice:
    """Pick the longer of mMCP-wrist and mMCP-pinky MCP in image pixels.

    Ties go to the wrist.
    """
    joints = p.joints
    if not np.all(np.isfinite(joints)):
        raise InvalidPoseError("2D pose contains non-finite coordinates")
    wrist = _pixel_distance(joints, WRIST, MMCP, cam)
    pinky = _pixel_distance(joints, PINKY_MCP, MMCP, cam)
    if max(wrist, pinky) < MIN_KEY_BONE_PX:
        raise DegenerateKeyBoneError(
            f"key bone candidates span {wrist:.3g} px and {pinky:.3g} px; need {MIN_KEY_BONE_PX} px"
        )
    if pinky > wrist:
        return KeyBoneChoice(PINKY_MCP, pinky)
    return KeyBoneChoice(WRIST, wrist)


def root_radius(
    can: CanonicalPose,
    p: Pose2D,
    cam: CameraIntrinsics = DEFAULT_CAMERA,
    L: float = 10.0,
    s: int = WRIST,
) -> float:
    """Distance from the camera origin to the mMCP, in cm."""
    if s not in KEY_BONE_CANDIDATES:
        raise ValueError(f"joint {s} cannot be a key-bone secondary")
    if not L > 0:
        raise DomainError("key bone length must be positive")
    rotation = centering_rotation(p.joints[MMCP], cam)
    v = rotation @ image_rays(p.joints[s], cam)
    z_2d = v[2]
    h_2d = np.hypot(v[0], v[1])
    if h_2d < MIN_H2D:
        raise DegenerateGeometryError(f"secondary joint {s} lies on the root ray")
    x_s, y_s, z_s = can.joints[s]
    h_3d = np.hypot(x_s, y_s) * L
    z_3d = z_2d * h_3d / h_2d
    r = float(z_3d - z_s * L)
    if not r > 0:
        raise InconsistentInputsError(f"implied root distance {r:.6g} cm is not positive")
    return r


def reconstruct_global(
    can: Optional[CanonicalPose],
    p: Optional[Pose2D],
    cam: CameraIntrinsics = DEFAULT_CAMERA,
    L: float = 10.0,
) -> Optional[ReconstructionResult]:
    """Global camera-space pose, or ``None`` when the hand is absent."""
    if can is None or p is None:
        return None
    if not (np.all(np.isfinite(can.joints)) and np.all(np.isfinite(p.joints))):
        raise InvalidPoseError("inputs contain non-finite coordinates")
    choice = select_key_bone(p, cam)
    other = PINKY_MCP if choice.secondary == WRIST else WRIST
    try:
        r = root_radius(can, p, cam, L, choice.secondary)
    except DegenerateGeometryError:
        r = root_radius(can, p, cam, L, other)
        choice = KeyBoneChoice(other, _pixel_distance(p.joints, other, MMCP, cam))

    rotation = centering_rotation(p.joints[MMCP], cam)
    local = can.joints * L + np.array([0.0, 0.0, r])
    pose = HandPose3D(local @ rotation, can.side)
    theta, phi = spherical_angles(p.joints[MMCP], cam)
    return ReconstructionResult(pose, SphericalPoint(r, theta, phi), choice)
