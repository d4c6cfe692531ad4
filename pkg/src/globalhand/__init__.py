"""Geometry, detection, evaluation and tracking for monocular two-hand global 3D pose."""

from .camera import (
    CameraIntrinsics,
    SphericalPoint,
    back_project_ray,
    cart_to_spherical,
    centering_rotation,
    pixel_offset_cm,
    project_point,
    spherical_angles,
    spherical_to_cart,
)
from .canonical import CanonicalizationResult, canonicalize, cartesian_align, spherical_align
from .core import (
    MMCP,
    PINKY_MCP,
    WRIST,
    CanonicalPose,
    Handedness,
    HandPose3D,
    Pose2D,
    Skeleton,
    bone_lengths_of,
    bone_list,
    default_skeleton,
    validate_pose,
)
from .recon import KeyBoneChoice, ReconstructionResult, reconstruct_global, root_radius, select_key_bone

__version__ = "0.1.0"
