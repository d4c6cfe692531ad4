"""Record-level transforms behind the command-line tools."""
from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .camera import DEFAULT_CAMERA, CameraIntrinsics, project_point
from .canonical import canonicalize
from .core import MMCP, Handedness, HandPose3D
from .dataset import ABSENT, SIDES, FrameRecord, HandEntry
from .errors import GlobalHandError, SchemaError
from .heatmap import BBox, energy_bbox, read_heatmaps, read_pgm
from .recon import reconstruct_global
from .synth import NoiseModel, SynthParams, perturb, sample_frames, sample_sequence
from .tracking import TrackState

log = logging.getLogger(__name__)


def joints_bbox(rc: np.ndarray, cam: CameraIntrinsics) -> Optional[BBox]:
    """Tight pixel box around the in-image joints, or ``None`` if none are visible."""
    rows = rc[:, 0] * cam.height_px
    cols = rc[:, 1] * cam.width_px
    inside = (rows >= 0) & (rows < cam.height_px) & (cols >= 0) & (cols < cam.width_px)
    if not inside.any():
        return None
    rows, cols = rows[inside], cols[inside]
    return BBox(int(rows.min()), int(rows.max()), int(cols.min()), int(cols.max()))


def ground_truth_entry(pose: Optional[HandPose3D], cam: CameraIntrinsics) -> HandEntry:
    if pose is None:
        return ABSENT
    rc = project_point(pose.joints, cam)
    can = canonicalize(pose, cam).canonical.joints
    return HandEntry(True, pose.joints, rc, can, joints_bbox(rc, cam))


def synth_records(
    seed: int,
    frames: int,
    sequences: int = 0,
    drop_rate: float = 0.1,
    camera: CameraIntrinsics = DEFAULT_CAMERA,
) -> list[FrameRecord]:
    """Static frames when ``sequences`` is 0, else that many sequences of ``frames`` frames."""
    records = []
    if sequences <= 0:
        params = SynthParams(seed=seed, drop_rate=drop_rate, camera=camera)
        for i, (left, right) in enumerate(sample_frames(params, frames)):
            records.append(FrameRecord(i, camera, ground_truth_entry(left, camera), ground_truth_entry(right, camera)))
        return records
    children = np.random.SeedSequence(seed).spawn(sequences)
    for s, child in enumerate(children):
        params = SynthParams(seed=int(child.generate_state(1)[0]), drop_rate=drop_rate, camera=camera)
        for f in sample_sequence(params, frames):
            records.append(
                FrameRecord(f.frame, camera, ground_truth_entry(f.left, camera), ground_truth_entry(f.right, camera), s)
            )
    return records


def canonicalize_records(records: Iterable[FrameRecord]) -> list[FrameRecord]:
    """Fill in 2D and canonical joints from the global ones."""
    out = []
    for record in records:
        for side in SIDES:
            entry = record.hand(side)
            if entry.present and entry.xyz_cm is not None:
                pose = HandPose3D(entry.xyz_cm, side)
                rc = project_point(pose.joints, record.camera)
                can = canonicalize(pose, record.camera).canonical.joints
                record = record.with_hand(side, entry.updated(rc=rc, can=can))
        out.append(record)
    return out


def reconstruct_records(records: Iterable[FrameRecord], key_bone_length: float = 10.0) -> tuple[list[FrameRecord], int]:
    """Global joints from 2D + canonical joints; returns the records and the failure count.

    A hand that cannot be reconstructed stays present without ``xyz_cm``.
    """
    out, failures = [], 0
    for record in records:
        for side in SIDES:
            entry = record.hand(side)
            if not (entry.present and entry.rc is not None and entry.can is not None):
                continue
            try:
                result = reconstruct_global(entry.canonical(side), entry.pose2d(side), record.camera, key_bone_length)
                xyz = result.pose.joints
            except GlobalHandError as exc:
                log.warning("frame %s %s hand: %s", record.frame, side.value, exc)
                failures += 1
                xyz = None
            record = record.with_hand(side, entry.updated(xyz_cm=xyz))
        out.append(record)
    return out, failures


def perturb_records(records: Iterable[FrameRecord], noise: NoiseModel) -> list[FrameRecord]:
    """Replace exact 2D/canonical joints with noisy ones and drop the global joints."""
    rng = np.random.default_rng(noise.seed)
    out = []
    for record in records:
        for side in SIDES:
            entry = record.hand(side)
            if not (entry.present and entry.xyz_cm is not None):
                continue
            p, can = perturb(HandPose3D(entry.xyz_cm, side), record.camera, noise, rng)
            record = record.with_hand(side, entry.updated(xyz_cm=None, rc=p.joints, can=can.joints))
        out.append(record)
    return out


def track_records(
    records: Sequence[FrameRecord], window: int = 5, degree: int = 2, extrapolate: bool = False
) -> list[FrameRecord]:
    """Smooth each hand's root distance over time, sliding the pose along the root ray.

    Each sequence (``seq``) gets fresh left and right track states.
    """
    out = list(records)
    order = sorted(range(len(out)), key=lambda i: out[i].key)
    states: dict[tuple[Optional[int], Handedness], TrackState] = {}
    for i in order:
        record = out[i]
        for side in SIDES:
            entry = record.hand(side)
            if not (entry.present and entry.xyz_cm is not None):
                continue
            state = states.setdefault((record.seq, side), TrackState(side, window, degree, extrapolate))
            root = entry.xyz_cm[MMCP]
            r = float(np.linalg.norm(root))
            smoothed = state.push(record.frame, r)
            shifted = entry.xyz_cm + (smoothed - r) * root / r
            record = record.with_hand(side, entry.updated(xyz_cm=shifted))
        out[i] = record
    return out


_ENERGY_NAME = re.compile(r"^(?:(?P<seq>\d+)_)?(?P<frame>\d+)_(?P<side>left|right)\.(?P<ext>pgm|bin)$")


def detect_dir(
    energy_dir,
    img_h: int = DEFAULT_CAMERA.height_px,
    img_w: int = DEFAULT_CAMERA.width_px,
    tau_abs: float = 0.1,
    margin: float = 0.15,
) -> list[FrameRecord]:
    """Detect hands from energy maps named ``[<seq>_]<frame>_<left|right>.(pgm|bin)``."""
    found: dict[tuple[Optional[int], int], dict[Handedness, HandEntry]] = {}
    for path in sorted(Path(energy_dir).iterdir()):
        m = _ENERGY_NAME.match(path.name)
        if not m:
            continue
        if m["ext"] == "pgm":
            energy = read_pgm(path)
        else:
            maps = read_heatmaps(path)
            if len(maps) != 1:
                raise SchemaError(f"{path}: expected exactly one energy map")
            energy = maps[0]
        outcome = energy_bbox(energy, img_h, img_w, tau_abs, margin)
        seq = int(m["seq"]) if m["seq"] is not None else None
        entry = HandEntry(True, bbox=outcome.bbox) if outcome.present else ABSENT
        found.setdefault((seq, int(m["frame"])), {})[Handedness(m["side"])] = entry
    camera = CameraIntrinsics(img_h, img_w, DEFAULT_CAMERA.foc_cm, DEFAULT_CAMERA.pxcm)
    return [
        FrameRecord(frame, camera, hands.get(Handedness.LEFT, ABSENT), hands.get(Handedness.RIGHT, ABSENT), seq)
        for (seq, frame), hands in sorted(found.items(), key=lambda kv: (kv[0][0] if kv[0][0] is not None else -1, kv[0][1]))
    ]
