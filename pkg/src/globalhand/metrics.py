"""Evaluation metrics and the canonical-pose training losses."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .camera import DEFAULT_CAMERA, CameraIntrinsics, cart_to_spherical, centering_rotation, image_rays
from .core import MMCP, WRIST, CanonicalPose, HandPose3D, Pose2D, Skeleton, bone_lengths_of
from .errors import (
    DegenerateGeometryError,
    InconsistentInputsError,
    LossUnavailableError,
    MetricError,
)
from .heatmap import BBox
from .recon import MIN_KEY_BONE_PX, root_radius

BACKGROUND, LEFT_LABEL, RIGHT_LABEL = 0, 1, 2
IOU_POSITIVE = 0.5


@dataclass(frozen=True, eq=False)
class PCKCurve:
    thresholds: np.ndarray
    fractions: np.ndarray

    def __post_init__(self):
        t = np.array(self.thresholds, dtype=np.float64)
        f = np.array(self.fractions, dtype=np.float64)
        if t.ndim != 1 or t.shape != f.shape or t.size == 0:
            raise MetricError("thresholds and fractions must be equal-length 1D sequences")
        if np.any(np.diff(t) <= 0):
            raise MetricError("thresholds must be strictly ascending")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "fractions", f)

    def at(self, threshold: float) -> float:
        return float(np.interp(threshold, self.thresholds, self.fractions))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("threshold,fraction\n")
        for t, f in zip(self.thresholds, self.fractions):
            buf.write(f"{t:.9g},{f:.9g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PCKCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or set(rows[0]) != {"threshold", "fraction"}:
            raise MetricError("curve CSV needs a 'threshold,fraction' header")
        return cls([float(r["threshold"]) for r in rows], [float(r["fraction"]) for r in rows])

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def read_csv(cls, path) -> "PCKCurve":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"))


class SphericalPCK(NamedTuple):
    theta_curve: PCKCurve
    phi_curve: PCKCurve
    radius_curve: PCKCurve


class LossBreakdown(NamedTuple):
    l_j: float
    l_bone: float
    l_proj: float
    l_3d: float


def joint_errors_mm(pred: HandPose3D, gt: HandPose3D) -> np.ndarray:
    if pred.side != gt.side:
        raise MetricError(f"cannot compare a {pred.side.value} hand with a {gt.side.value} hand")
    return np.linalg.norm(pred.joints - gt.joints, axis=1) * 10.0


def epe(pred: HandPose3D, gt: HandPose3D) -> tuple[float, float]:
    """Mean and median end-point error in mm."""
    errors = joint_errors_mm(pred, gt)
    return float(errors.mean()), float(np.median(errors))


def pck_curve(errors: Sequence[float], thresholds: Sequence[float]) -> PCKCurve:
    """Fraction of errors ``<= t`` for every threshold ``t``."""
    errors = np.asarray(errors, dtype=np.float64).ravel()
    if errors.size == 0:
        raise MetricError("no errors to evaluate")
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if np.any(np.diff(thresholds) <= 0):
        raise MetricError("thresholds must be strictly ascending")
    ordered = np.sort(errors)
    # NaN sorts last and never counts as correct
    counts = np.searchsorted(ordered, thresholds, side="right")
    return PCKCurve(thresholds, counts / errors.size)


def auc(curve: PCKCurve, lo: float, hi: float) -> float:
    """Normalized trapezoidal area under ``curve`` over ``[lo, hi]``."""
    t = curve.thresholds
    if not lo < hi:
        raise MetricError("AUC range must satisfy lo < hi")
    if lo < t[0] or hi > t[-1]:
        raise MetricError(f"AUC range [{lo}, {hi}] outside curve span [{t[0]}, {t[-1]}]")
    inner = t[(t > lo) & (t < hi)]
    xs = np.concatenate([[lo], inner, [hi]])
    ys = np.interp(xs, t, curve.fractions)
    area = np.sum((xs[1:] - xs[:-1]) * (ys[1:] + ys[:-1]) / 2)
    return float(area / (hi - lo))


def spherical_errors(pred_roots, gt_roots) -> np.ndarray:
    """Per-frame ``(|d theta| deg, |d phi| deg, |d r| cm)``; rows are NaN for missing predictions."""
    if len(pred_roots) != len(gt_roots):
        raise MetricError("prediction and ground-truth root counts differ")
    if len(gt_roots) == 0:
        raise MetricError("no roots to evaluate")
    out = np.full((len(gt_roots), 3), np.nan)
    for i, (pred, gt) in enumerate(zip(pred_roots, gt_roots)):
        if pred is None:
            continue
        sp, sg = cart_to_spherical(pred), cart_to_spherical(gt)
        out[i] = (
            abs(np.degrees(sp.theta - sg.theta)),
            abs(np.degrees(sp.phi - sg.phi)),
            abs(sp.r - sg.r),
        )
    return out


def spherical_pck(pred_roots, gt_roots, angle_thresholds, radius_thresholds) -> SphericalPCK:
    """Directional and distance accuracy of the root joint.

    A ``None`` prediction counts as wrong at every threshold.
    """
    errors = spherical_errors(pred_roots, gt_roots)
    return SphericalPCK(
        pck_curve(errors[:, 0], angle_thresholds),
        pck_curve(errors[:, 1], angle_thresholds),
        pck_curve(errors[:, 2], radius_thresholds),
    )


def mask_miou(pred, gt) -> float:
    """Mean IoU over hand labels present in ``gt``; NaN if ``gt`` has no hands."""
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise MetricError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    ious = []
    for label in (LEFT_LABEL, RIGHT_LABEL):
        g = gt == label
        if not g.any():
            continue
        p = pred == label
        ious.append(np.count_nonzero(p & g) / np.count_nonzero(p | g))
    return float(np.mean(ious)) if ious else float("nan")


def bbox_iou(a: BBox, b: BBox) -> float:
    rows = min(a.row_max, b.row_max) - max(a.row_min, b.row_min) + 1
    cols = min(a.col_max, b.col_max) - max(a.col_min, b.col_min) + 1
    if rows <= 0 or cols <= 0:
        return 0.0
    inter = rows * cols
    return inter / (a.area + b.area - inter)


def detection_accuracy(preds: Sequence[Optional[BBox]], gts: Sequence[Optional[BBox]]) -> tuple[float, float]:
    """Presence accuracy over all frames, and IoU > 0.5 rate over frames where both boxes exist.

    The box rate is NaN when no frame has both boxes.
    """
    if len(preds) != len(gts):
        raise MetricError("prediction and ground-truth lengths differ")
    if not gts:
        raise MetricError("no frames to evaluate")
    presence = [(p is None) == (g is None) for p, g in zip(preds, gts)]
    hits = [bbox_iou(p, g) > IOU_POSITIVE for p, g in zip(preds, gts) if p is not None and g is not None]
    return float(np.mean(presence)), float(np.mean(hits)) if hits else float("nan")


def lift_to_canonical(can: CanonicalPose, p: Pose2D, cam: CameraIntrinsics = DEFAULT_CAMERA) -> np.ndarray:
    """Place the 2D joints in the canonical frame's (x, y) plane.

    Each joint's ray is rotated into the view-centered frame and scaled to the
    depth the canonical pose assigns it; the root distance in canonical units
    comes from the wrist bone.  Exact when ``can`` and ``p`` are consistent.
    """
    wrist_px = np.hypot(
        (p.joints[WRIST, 0] - p.joints[MMCP, 0]) * cam.height_px,
        (p.joints[WRIST, 1] - p.joints[MMCP, 1]) * cam.width_px,
    )
    if wrist_px < MIN_KEY_BONE_PX:
        raise LossUnavailableError(f"wrist-mMCP spans {wrist_px:.3g} px in the image")
    try:
        rho = root_radius(can, p, cam, 1.0, WRIST)
    except (DegenerateGeometryError, InconsistentInputsError) as exc:
        raise LossUnavailableError(str(exc)) from exc
    rotation = centering_rotation(p.joints[MMCP], cam)
    rays = image_rays(p.joints, cam) @ rotation.T
    slopes = rays[:, :2] / rays[:, 2:]
    return slopes * (rho + can.joints[:, 2:])


def canonical_losses(
    pred_can: CanonicalPose,
    gt_can: CanonicalPose,
    p: Pose2D,
    skeleton: Skeleton | None = None,
    cam: CameraIntrinsics = DEFAULT_CAMERA,
) -> LossBreakdown:
    l_j = float(np.mean((pred_can.joints - gt_can.joints) ** 2))
    l_bone = float(np.mean((bone_lengths_of(pred_can, skeleton) - bone_lengths_of(gt_can, skeleton)) ** 2))
    lifted = lift_to_canonical(pred_can, p, cam)
    l_proj = float(np.mean((pred_can.joints[:, :2] - lifted) ** 2))
    return LossBreakdown(l_j, l_bone, l_proj, l_j + l_bone + l_proj)
