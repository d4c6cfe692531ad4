"""View-centered canonical frame and the two evaluation alignments."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .camera import DEFAULT_CAMERA, CameraIntrinsics, centering_rotation, project_point
from .core import MMCP, WRIST, CanonicalPose, HandPose3D
from .errors import DegeneratePoseError, DomainError, InvalidPoseError

MIN_KEY_BONE_CM = 1e-9


class CanonicalizationResult(NamedTuple):
    canonical: CanonicalPose
    d: float
    rotation: np.ndarray


def canonicalize(pose: HandPose3D, cam: CameraIntrinsics = DEFAULT_CAMERA) -> CanonicalizationResult:
    """Rotate the pose so the mMCP sits on the optical axis, then center and normalize.

    The rotation is the centering rotation of the mMCP's image point; ``d`` is
    the wrist-mMCP distance used as the unit of length.
    """
    joints = pose.joints
    if not np.all(np.isfinite(joints)):
        raise InvalidPoseError("pose contains non-finite coordinates")
    root = joints[MMCP]
    if not root[2] > 0:
        raise DomainError("mMCP must be in front of the camera")
    d = float(np.linalg.norm(joints[WRIST] - root))
    if d < MIN_KEY_BONE_CM:
        raise DegeneratePoseError(f"wrist-mMCP distance {d:g} cm is degenerate")
    rotation = centering_rotation(project_point(root, cam), cam)
    centered = joints @ rotation.T
    canonical = (centered - centered[MMCP]) / d
    return CanonicalizationResult(CanonicalPose(canonical, pose.side), d, rotation)


def _check_length(L: float) -> None:
    if not L > 0:
        raise DomainError("key bone length must be positive")


def spherical_align(
    can: CanonicalPose, L: float, gt_root, cam: CameraIntrinsics = DEFAULT_CAMERA
) -> HandPose3D:
    """Place a canonical pose so its root lands on ``gt_root``.

    Scales by ``L``, pushes the root out to ``|gt_root|`` along +z and undoes
    the centering rotation of the root's image position.
    """
    _check_length(L)
    gt_root = np.asarray(gt_root, dtype=np.float64)
    if not gt_root[2] > 0:
        raise DomainError("ground-truth root must be in front of the camera")
    rotation = centering_rotation(project_point(gt_root, cam), cam)
    local = can.joints * L + np.array([0.0, 0.0, np.linalg.norm(gt_root)])
    return HandPose3D(local @ rotation, can.side)


def cartesian_align(can: CanonicalPose, L: float, gt_root) -> HandPose3D:
    """Scale by ``L`` and translate the root onto ``gt_root``; no rotation."""
    _check_length(L)
    return HandPose3D(can.joints * L + np.asarray(gt_root, dtype=np.float64), can.side)
