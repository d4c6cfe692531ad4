import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from globalhand.camera import (
    CameraIntrinsics,
    back_project_ray,
    cart_to_spherical,
    centering_rotation,
    pixel_offset_cm,
    project_point,
    spherical_angles,
    spherical_to_cart,
)
from globalhand.errors import BehindCameraError, DomainError

unit = st.floats(0.0, 1.0)
image_points = st.tuples(unit, unit)
frustum_points = st.tuples(
    st.floats(-80, 80), st.floats(-80, 80), st.floats(1.0, 200.0)
)


def _independent_centering(p, cam):
    """Rotation built from explicit angles rather than vector components."""
    u = (p[1] * cam.width_px - cam.width_px / 2) / cam.pxcm
    v = (p[0] * cam.height_px - cam.height_px / 2) / cam.pxcm
    azimuth = math.atan2(u, cam.foc_cm)
    elevation = math.atan2(v, math.hypot(u, cam.foc_cm))
    ca, sa = math.cos(-azimuth), math.sin(-azimuth)
    ry = np.array([[ca, 0, sa], [0, 1, 0], [-sa, 0, ca]])
    cb, sb = math.cos(elevation), math.sin(elevation)
    rx = np.array([[1, 0, 0], [0, cb, -sb], [0, sb, cb]])
    return rx @ ry


def test_pixel_offset_examples(cam):
    np.testing.assert_array_equal(pixel_offset_cm((0.5, 0.5), cam), [0.0, 0.0])
    np.testing.assert_array_equal(pixel_offset_cm((0.5, 1.0), cam), [2.0, 0.0])
    np.testing.assert_array_equal(pixel_offset_cm((0.0, 0.5), cam), [0.0, -1.125])


def test_spherical_angle_examples(cam):
    assert spherical_angles((0.5, 0.5), cam) == (0.0, 0.0)
    theta, phi = spherical_angles((0.5, 1.0), cam)
    assert theta == 0.0
    assert phi == pytest.approx(0.5880026035475675, abs=1e-15)
    theta, phi = spherical_angles((0.0, 0.5), cam)
    assert theta == pytest.approx(-0.35877067027057225, abs=1e-15)
    assert phi == 0.0


def test_project_point_examples(cam):
    np.testing.assert_array_equal(project_point((0, 0, 50), cam), [0.5, 0.5])
    np.testing.assert_allclose(project_point((10, 0, 30), cam), [0.5, 0.75], atol=1e-15)
    with pytest.raises(BehindCameraError):
        project_point((0, 0, -1), cam)
    with pytest.raises(BehindCameraError):
        project_point((0, 0, 0), cam)


def test_back_project_examples(cam):
    np.testing.assert_array_equal(back_project_ray((0.5, 0.5), cam), [0, 0, 1])
    np.testing.assert_allclose(back_project_ray((0.5, 1.0), cam), [0.5547001962252291, 0, 0.8320502943378437], atol=1e-15)


@given(image_points, st.floats(0.01, 1e4))
def test_back_projection_reprojects(p, scale):
    cam = CameraIntrinsics()
    ray = back_project_ray(p, cam)
    assert ray[2] > 0
    np.testing.assert_allclose(project_point(ray * scale, cam), p, atol=1e-12)


@given(frustum_points, st.floats(0.01, 100.0))
def test_projection_depth_invariant(w, lam):
    cam = CameraIntrinsics()
    w = np.array(w)
    np.testing.assert_allclose(project_point(w * lam, cam), project_point(w, cam), atol=1e-12)


def test_centering_identity_at_center(cam):
    np.testing.assert_array_equal(centering_rotation((0.5, 0.5), cam), np.eye(3))


@given(image_points)
def test_centering_rotation_contract(p):
    cam = CameraIntrinsics()
    r = centering_rotation(p, cam)
    assert np.linalg.norm(r @ back_project_ray(p, cam) - [0, 0, 1]) < 1e-12
    np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(r) - 1) < 1e-12
    np.testing.assert_allclose(r, _independent_centering(p, cam), atol=1e-12)


@given(image_points)
def test_centering_has_no_roll(p):
    # the centered frame's x axis stays horizontal in camera space
    r = centering_rotation(p, CameraIntrinsics())
    assert r[0, 1] == 0.0


@given(frustum_points)
def test_centering_aligns_point(w):
    cam = CameraIntrinsics()
    w = np.array(w)
    aligned = centering_rotation(project_point(w, cam), cam) @ w
    assert np.abs(aligned[:2]).max() < 1e-9 * np.linalg.norm(w)


def test_spherical_examples():
    assert cart_to_spherical((0, 0, 50)) == (50.0, 0.0, 0.0)
    s2 = cart_to_spherical((0, 0, 100))
    assert s2.r == 100 and s2.theta == 0 and s2.phi == 0
    with pytest.raises(DomainError):
        cart_to_spherical((1, 1, 0))
    with pytest.raises(DomainError):
        spherical_to_cart((0.0, 0.1, 0.1))


def test_spherical_round_trip_1000():
    rng = np.random.default_rng(0)
    cam = CameraIntrinsics()
    worst = 0.0
    for _ in range(1000):
        p = rng.uniform(0, 1, 2)
        w = back_project_ray(p, cam) * rng.uniform(5, 200)
        worst = max(worst, np.abs(spherical_to_cart(cart_to_spherical(w)) - w).max())
    assert worst < 1e-9


@given(frustum_points)
def test_spherical_angles_agree_with_image_angles(w):
    cam = CameraIntrinsics()
    s = cart_to_spherical(w)
    theta, phi = spherical_angles(project_point(w, cam), cam)
    assert s.theta == pytest.approx(theta, abs=1e-12)
    assert s.phi == pytest.approx(phi, abs=1e-12)


@settings(max_examples=50)
@given(frustum_points, st.floats(0.1, 10))
def test_spherical_homogeneity(w, lam):
    s1 = cart_to_spherical(w)
    s2 = cart_to_spherical(np.array(w) * lam)
    assert s2.r == pytest.approx(lam * s1.r, rel=1e-12)
    assert s2.theta == pytest.approx(s1.theta, abs=1e-12)
    assert s2.phi == pytest.approx(s1.phi, abs=1e-12)


def test_camera_rejects_nonpositive():
    with pytest.raises(ValueError):
        CameraIntrinsics(foc_cm=0.0)
