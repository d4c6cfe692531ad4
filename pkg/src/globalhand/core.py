"""Joint indexing, skeleton topology and pose containers.

Joint layout (21 joints): wrist is 0, then each finger contributes MCP, PIP,
DIP and TIP consecutively in the order thumb, index, middle, ring, pinky.

Camera space is +x right, +y down, +z forward, in centimeters.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidPoseError

NUM_JOINTS = 21
NUM_BONES = 20

WRIST = 0
THUMB_MCP, INDEX_MCP, MIDDLE_MCP, RING_MCP, PINKY_MCP = 1, 5, 9, 13, 17
MMCP = MIDDLE_MCP
FINGERS = ("thumb", "index", "middle", "ring", "pinky")
FINGER_MCPS = (THUMB_MCP, INDEX_MCP, MIDDLE_MCP, RING_MCP, PINKY_MCP)

JOINT_NAMES = ("wrist",) + tuple(
    f"{finger}_{part}" for finger in FINGERS for part in ("mcp", "pip", "dip", "tip")
)

# wrist -> each MCP first, then along each finger
BONES: tuple[tuple[int, int], ...] = tuple((WRIST, m) for m in FINGER_MCPS) + tuple(
    (m + k, m + k + 1) for m in FINGER_MCPS for k in range(3)
)

# cm, for a hand whose wrist-mMCP bone is 10 cm
_BASE_KEY_BONE = 10.0
_BASE_LENGTHS = {
    (WRIST, THUMB_MCP): 5.1,
    (WRIST, INDEX_MCP): 9.85,
    (WRIST, MIDDLE_MCP): 10.0,
    (WRIST, RING_MCP): 9.4,
    (WRIST, PINKY_MCP): 9.1,
    # proximal, middle, distal segment per finger
    **dict(zip([(1, 2), (2, 3), (3, 4)], (3.2, 3.0, 2.6))),
    **dict(zip([(5, 6), (6, 7), (7, 8)], (4.5, 2.6, 2.2))),
    **dict(zip([(9, 10), (10, 11), (11, 12)], (5.0, 3.0, 2.4))),
    **dict(zip([(13, 14), (14, 15), (15, 16)], (4.6, 2.9, 2.3))),
    **dict(zip([(17, 18), (18, 19), (19, 20)], (3.6, 2.1, 2.0))),
}

NONCOLLINEAR_AREA_CM2 = 1e-6


class Handedness(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


def _frozen_array(values, shape: tuple[int, ...], what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.shape != shape:
        raise InvalidPoseError(f"{what} must have shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HandPose3D:
    """21 camera-space joints in cm."""

    joints: np.ndarray
    side: Handedness = Handedness.RIGHT

    def __post_init__(self):
        object.__setattr__(self, "joints", _frozen_array(self.joints, (NUM_JOINTS, 3), "joints"))
        object.__setattr__(self, "side", Handedness(self.side))

    @property
    def root(self) -> np.ndarray:
        return self.joints[MMCP]


@dataclass(frozen=True, eq=False)
class CanonicalPose:
    """Dimensionless pose: mMCP at the origin, wrist at unit distance."""

    joints: np.ndarray
    side: Handedness = Handedness.RIGHT

    def __post_init__(self):
        object.__setattr__(self, "joints", _frozen_array(self.joints, (NUM_JOINTS, 3), "joints"))
        object.__setattr__(self, "side", Handedness(self.side))


@dataclass(frozen=True, eq=False)
class Pose2D:
    """Normalized (row, col) image coordinates; (0, 0) is the top-left corner."""

    joints: np.ndarray
    side: Handedness = Handedness.RIGHT

    def __post_init__(self):
        object.__setattr__(self, "joints", _frozen_array(self.joints, (NUM_JOINTS, 2), "joints"))
        object.__setattr__(self, "side", Handedness(self.side))


@dataclass(frozen=True, eq=False)
class Skeleton:
    bones: tuple[tuple[int, int], ...] = BONES
    reference_lengths: np.ndarray = field(
        default_factory=lambda: np.array([_BASE_LENGTHS[b] for b in BONES])
    )
    key_bone_length: float = _BASE_KEY_BONE

    def __post_init__(self):
        lengths = np.array(self.reference_lengths, dtype=np.float64)
        if lengths.shape != (len(self.bones),):
            raise ValueError("one reference length per bone is required")
        if self.key_bone_length <= 0 or np.any(lengths <= 0):
            raise ValueError("bone lengths must be positive")
        key = lengths[self.bones.index((WRIST, MMCP))]
        if not np.isclose(key, self.key_bone_length, rtol=1e-12, atol=0.0):
            raise ValueError("wrist-mMCP reference length must equal key_bone_length")
        lengths.setflags(write=False)
        object.__setattr__(self, "reference_lengths", lengths)

    def length_of(self, parent: int, child: int) -> float:
        return float(self.reference_lengths[self.bones.index((parent, child))])


def default_skeleton(key_bone_length: float = _BASE_KEY_BONE) -> Skeleton:
    """Default hand proportions scaled so the wrist-mMCP bone is ``key_bone_length``."""
    scale = key_bone_length / _BASE_KEY_BONE
    lengths = np.array([_BASE_LENGTHS[b] for b in BONES]) * scale
    lengths[BONES.index((WRIST, MMCP))] = key_bone_length
    return Skeleton(BONES, lengths, key_bone_length)


def bone_list(skeleton: Skeleton | None = None) -> tuple[tuple[int, int], ...]:
    return (skeleton or Skeleton()).bones


def bone_lengths_of(pose: HandPose3D | CanonicalPose, skeleton: Skeleton | None = None) -> np.ndarray:
    """Length of every skeleton edge, in the pose's own units."""
    joints = pose.joints
    if not np.all(np.isfinite(joints)):
        raise InvalidPoseError("pose contains non-finite coordinates")
    bones = np.array(bone_list(skeleton))
    return np.linalg.norm(joints[bones[:, 1]] - joints[bones[:, 0]], axis=1)


def key_triangle_area(joints: np.ndarray) -> float:
    """Area of the wrist / mMCP / pinky-MCP triangle."""
    a = joints[MMCP] - joints[WRIST]
    b = joints[PINKY_MCP] - joints[WRIST]
    return 0.5 * float(np.linalg.norm(np.cross(a, b)))


class PoseDiagnostics(NamedTuple):
    finite: bool
    positive_depth: bool
    non_degenerate: bool

    @property
    def ok(self) -> bool:
        return self.finite and self.positive_depth and self.non_degenerate

    def failures(self) -> list[str]:
        return [name for name, passed in zip(self._fields, self) if not passed]


def validate_pose(pose: HandPose3D) -> PoseDiagnostics:
    joints = pose.joints
    finite = bool(np.all(np.isfinite(joints)))
    if not finite:
        return PoseDiagnostics(False, False, False)
    positive_depth = bool(np.all(joints[:, 2] > 0))
    non_degenerate = key_triangle_area(joints) > NONCOLLINEAR_AREA_CM2
    return PoseDiagnostics(finite, positive_depth, non_degenerate)
