"""Pinhole camera with image-plane coordinates in centimeters.

Normalized image points are ``(row, col)`` pairs in ``[0, 1]``.  Offsets from
the image center are returned as ``(u, v)`` in cm with ``u`` horizontal
(+x, right) and ``v`` vertical (+y, down), so a camera-space point
``(x, y, z)`` lands at ``u = foc * x / z`` and ``v = foc * y / z``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BehindCameraError, DomainError


@dataclass(frozen=True)
class CameraIntrinsics:
    height_px: int = 270
    width_px: int = 480
    foc_cm: float = 3.0
    pxcm: float = 120.0

    def __post_init__(self):
        if min(self.height_px, self.width_px) <= 0 or self.foc_cm <= 0 or self.pxcm <= 0:
            raise ValueError(f"camera parameters must be strictly positive: {self}")


DEFAULT_CAMERA = CameraIntrinsics()


class SphericalPoint(NamedTuple):
    r: float
    theta: float
    phi: float


def pixel_offset_cm(p, cam: CameraIntrinsics = DEFAULT_CAMERA) -> np.ndarray:
    """Map normalized ``(row, col)`` points to image-plane ``(u, v)`` in cm."""
    p = np.asarray(p, dtype=np.float64)
    u = (p[..., 1] * cam.width_px - cam.width_px / 2) / cam.pxcm
    v = (p[..., 0] * cam.height_px - cam.height_px / 2) / cam.pxcm
    return np.stack([u, v], axis=-1)


def spherical_angles(p, cam: CameraIntrinsics = DEFAULT_CAMERA):
    """Elevation-style ``theta`` and horizontal ``phi`` of an image point.

    Each angle is an independent two-argument arctangent of the image-plane
    offset against the focal length.
    """
    uv = pixel_offset_cm(p, cam)
    theta = np.arctan2(uv[..., 1], cam.foc_cm)
    phi = np.arctan2(uv[..., 0], cam.foc_cm)
    if theta.ndim == 0:
        return float(theta), float(phi)
    return theta, phi


def project_point(w, cam: CameraIntrinsics = DEFAULT_CAMERA) -> np.ndarray:
    """Project camera-space points (cm) to normalized ``(row, col)``."""
    w = np.asarray(w, dtype=np.float64)
    z = w[..., 2]
    if np.any(~(z > 0)):
        raise BehindCameraError("cannot project a point with z <= 0")
    u = cam.foc_cm * w[..., 0] / z
    v = cam.foc_cm * w[..., 1] / z
    col = (u * cam.pxcm + cam.width_px / 2) / cam.width_px
    row = (v * cam.pxcm + cam.height_px / 2) / cam.height_px
    return np.stack([row, col], axis=-1)


def image_rays(p, cam: CameraIntrinsics = DEFAULT_CAMERA) -> np.ndarray:
    """Unnormalized rays ``(u, v, foc)`` through image points."""
    uv = pixel_offset_cm(p, cam)
    foc = np.full(uv.shape[:-1] + (1,), cam.foc_cm)
    return np.concatenate([uv, foc], axis=-1)


def back_project_ray(p, cam: CameraIntrinsics = DEFAULT_CAMERA) -> np.ndarray:
    ray = image_rays(p, cam)
    return ray / np.linalg.norm(ray, axis=-1, keepdims=True)


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_to_axis(direction) -> np.ndarray:
    """No-roll rotation taking ``direction`` onto +z.

    Azimuth is removed first by a rotation about y, then elevation by a
    rotation about x.  Sines and cosines come straight from the vector
    components, so the result is exact to rounding.
    """
    dx, dy, dz = np.asarray(direction, dtype=np.float64) / np.linalg.norm(direction)
    h = np.hypot(dx, dz)
    if h == 0.0:
        raise DomainError("direction is perpendicular to the optical axis")
    sa, ca = dx / h, dz / h
    unyaw = np.array([[ca, 0.0, -sa], [0.0, 1.0, 0.0], [sa, 0.0, ca]])
    sb, cb = dy, h
    unpitch = np.array([[1.0, 0.0, 0.0], [0.0, cb, -sb], [0.0, sb, cb]])
    return unpitch @ unyaw


def centering_rotation(p_root, cam: CameraIntrinsics = DEFAULT_CAMERA) -> np.ndarray:
    """Rotation bringing the ray through ``p_root`` onto the optical axis."""
    return rotation_to_axis(image_rays(p_root, cam))


def cart_to_spherical(w) -> SphericalPoint:
    x, y, z = (float(c) for c in w)
    if not z > 0:
        raise DomainError("spherical coordinates need z > 0")
    return SphericalPoint(float(np.sqrt(x * x + y * y + z * z)), float(np.arctan2(y, z)), float(np.arctan2(x, z)))


def spherical_to_cart(s: SphericalPoint) -> np.ndarray:
    r, theta, phi = s
    if not r > 0:
        raise DomainError("spherical radius must be positive")
    direction = np.array([np.tan(phi), np.tan(theta), 1.0])
    return r * direction / np.linalg.norm(direction)
