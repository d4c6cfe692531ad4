"""Batch evaluation of a predicted dataset against ground truth."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .canonical import spherical_align
from .core import MMCP, Handedness
from .dataset import SIDES, FrameRecord
from .errors import AlignmentError
from .metrics import PCKCurve, auc, detection_accuracy, pck_curve, spherical_errors

REPORT_ANGLE_DEG = 3.0
REPORT_RADIUS_CM = 7.0


@dataclass(frozen=True)
class EvaluationConfig:
    pck3d_thresholds_mm: tuple[float, ...] = tuple(float(t) for t in range(0, 51))
    auc3d_range_mm: tuple[float, float] = (20.0, 50.0)
    pck2d_thresholds_px: tuple[float, ...] = tuple(float(t) for t in range(0, 31))
    auc2d_range_px: tuple[float, float] = (0.0, 30.0)
    # spherical grids start one step above zero: a float reconstruction is never exactly error-free
    angle_thresholds_deg: tuple[float, ...] = tuple(round(0.1 * i, 10) for i in range(1, 101))
    radius_thresholds_cm: tuple[float, ...] = tuple(round(0.1 * i, 10) for i in range(1, 201))
    key_bone_length: float = 10.0


@dataclass
class EvaluationReport:
    summary: dict[str, float] = field(default_factory=dict)
    per_hand: dict[str, dict[str, float]] = field(default_factory=dict)
    curves: dict[str, PCKCurve] = field(default_factory=dict)

    def to_dict(self) -> dict:
        def clean(d):
            return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}

        return {
            "summary": clean(self.summary),
            "per_hand": {side: clean(values) for side, values in self.per_hand.items()},
            "curves": sorted(self.curves),
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def write_curves(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for name, curve in self.curves.items():
            curve.write_csv(directory / f"{name.replace('/', '_')}.csv")


def _align(gt: Sequence[FrameRecord], pred: Sequence[FrameRecord]) -> list[tuple[FrameRecord, FrameRecord]]:
    gt_by_key = {r.key: r for r in gt}
    pred_by_key = {r.key: r for r in pred}
    if len(gt_by_key) != len(gt) or len(pred_by_key) != len(pred):
        raise AlignmentError("duplicate frame indices")
    if gt_by_key.keys() != pred_by_key.keys():
        missing = sorted(gt_by_key.keys() ^ pred_by_key.keys())[:5]
        raise AlignmentError(f"ground truth and prediction frames differ, e.g. {missing}")
    return [(gt_by_key[k], pred_by_key[k]) for k in sorted(gt_by_key)]


def _pixel_errors(pred_rc: np.ndarray, gt_rc: np.ndarray, h: int, w: int) -> np.ndarray:
    d = pred_rc - gt_rc
    return np.hypot(d[:, 0] * h, d[:, 1] * w)


def _evaluate_side(pairs, side: Handedness, config: EvaluationConfig):
    scalars: dict[str, float] = {}
    curves: dict[str, PCKCurve] = {}
    err3d, err2d, errcan, gt_roots, pred_roots = [], [], [], [], []
    presence, box_pairs = [], []
    for gt_rec, pred_rec in pairs:
        g, p = gt_rec.hand(side), pred_rec.hand(side)
        presence.append(g.present == p.present)
        if not (g.present and p.present):
            continue
        if g.bbox is not None and p.bbox is not None:
            box_pairs.append((p.bbox, g.bbox))
        if g.xyz_cm is not None and p.xyz_cm is not None:
            err3d.append(np.linalg.norm(p.xyz_cm - g.xyz_cm, axis=1) * 10.0)
            gt_roots.append(g.xyz_cm[MMCP])
            pred_roots.append(p.xyz_cm[MMCP])
        if g.rc is not None and p.rc is not None:
            cam = gt_rec.camera
            err2d.append(_pixel_errors(p.rc, g.rc, cam.height_px, cam.width_px))
        if g.xyz_cm is not None and p.can is not None:
            aligned = spherical_align(p.canonical(side), config.key_bone_length, g.xyz_cm[MMCP], gt_rec.camera)
            errcan.append(np.linalg.norm(aligned.joints - g.xyz_cm, axis=1) * 10.0)

    scalars["hand_acc"] = float(np.mean(presence)) if presence else float("nan")
    if box_pairs:
        scalars["bbox_acc"] = detection_accuracy([a for a, _ in box_pairs], [b for _, b in box_pairs])[1]
    else:
        scalars["bbox_acc"] = float("nan")

    if err3d:
        errors = np.concatenate(err3d)
        scalars["epe_mean_mm"] = float(errors.mean())
        scalars["epe_median_mm"] = float(np.median(errors))
        curves["pck3d"] = pck_curve(errors, config.pck3d_thresholds_mm)
        scalars["auc3d"] = auc(curves["pck3d"], *config.auc3d_range_mm)
        sph = spherical_errors(pred_roots, gt_roots)
        curves["sph_theta"] = pck_curve(sph[:, 0], config.angle_thresholds_deg)
        curves["sph_phi"] = pck_curve(sph[:, 1], config.angle_thresholds_deg)
        curves["sph_radius"] = pck_curve(sph[:, 2], config.radius_thresholds_cm)
        scalars["sph_theta_at_3deg"] = float(np.mean(sph[:, 0] <= REPORT_ANGLE_DEG))
        scalars["sph_phi_at_3deg"] = float(np.mean(sph[:, 1] <= REPORT_ANGLE_DEG))
        scalars["sph_radius_at_7cm"] = float(np.mean(sph[:, 2] <= REPORT_RADIUS_CM))
    if err2d:
        errors = np.concatenate(err2d)
        scalars["epe2d_mean_px"] = float(errors.mean())
        curves["pck2d"] = pck_curve(errors, config.pck2d_thresholds_px)
        scalars["auc2d"] = auc(curves["pck2d"], *config.auc2d_range_px)
    if errcan:
        errors = np.concatenate(errcan)
        scalars["epe_can_mean_mm"] = float(errors.mean())
        scalars["epe_can_median_mm"] = float(np.median(errors))
        curves["pck_can"] = pck_curve(errors, config.pck3d_thresholds_mm)
        scalars["auc_can"] = auc(curves["pck_can"], *config.auc3d_range_mm)
    return scalars, curves


def evaluate_dataset(
    gt: Sequence[FrameRecord], pred: Sequence[FrameRecord], config: EvaluationConfig | None = None
) -> EvaluationReport:
    """Score predictions per hand and average the two hands.

    Frames are matched on ``(seq, frame)``.  Pose metrics use frames where the
    hand is present in both; presence mismatches only affect ``hand_acc``.
    """
    config = config or EvaluationConfig()
    pairs = _align(gt, pred)
    report = EvaluationReport()
    for side in SIDES:
        scalars, curves = _evaluate_side(pairs, side, config)
        report.per_hand[side.value] = scalars
        for name, curve in curves.items():
            report.curves[f"{side.value}/{name}"] = curve

    keys = sorted(set().union(*(h.keys() for h in report.per_hand.values())))
    for key in keys:
        values = [h[key] for h in report.per_hand.values() if key in h and not math.isnan(h[key])]
        report.summary[key] = float(np.mean(values)) if values else float("nan")
    names = {name.split("/", 1)[1] for name in report.curves}
    for name in sorted(names):
        per_side = [report.curves[f"{s.value}/{name}"] for s in SIDES if f"{s.value}/{name}" in report.curves]
        fractions = np.mean([c.fractions for c in per_side], axis=0)
        report.curves[name] = PCKCurve(per_side[0].thresholds, fractions)
    return report
