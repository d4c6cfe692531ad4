"""JSON-lines frame records.

One JSON object per line::

    {"frame": 0, "seq": 0,
     "camera": {"h": 270, "w": 480, "foc_cm": 3.0, "pxcm": 120.0},
     "left":  {"present": true, "xyz_cm": [[x, y, z] x21], "rc": [[r, c] x21],
               "can": [[x, y, z] x21], "bbox": [r0, r1, c0, c1]},
     "right": {"present": false}}

Every array is optional for a present hand and forbidden for an absent one.
``seq`` is optional and groups frames into sequences.  Unknown fields are
ignored.  Reals are written with 9 significant digits.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .camera import CameraIntrinsics
from .core import NUM_JOINTS, CanonicalPose, Handedness, HandPose3D, Pose2D
from .errors import ParseError, SchemaError
from .heatmap import BBox

SIDES = (Handedness.LEFT, Handedness.RIGHT)


@dataclass(frozen=True, eq=False)
class HandEntry:
    present: bool = False
    xyz_cm: Optional[np.ndarray] = None
    rc: Optional[np.ndarray] = None
    can: Optional[np.ndarray] = None
    bbox: Optional[BBox] = None

    def __post_init__(self):
        arrays = {"xyz_cm": 3, "rc": 2, "can": 3}
        for name, width in arrays.items():
            value = getattr(self, name)
            if value is None:
                continue
            if not self.present:
                raise SchemaError(f"absent hand carries '{name}'")
            arr = np.array(value, dtype=np.float64)
            if arr.shape != (NUM_JOINTS, width):
                raise SchemaError(f"'{name}' must be {NUM_JOINTS}x{width}, got {'x'.join(map(str, arr.shape))}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.bbox is not None and not self.present:
            raise SchemaError("absent hand carries 'bbox'")

    def pose3d(self, side: Handedness) -> Optional[HandPose3D]:
        return HandPose3D(self.xyz_cm, side) if self.xyz_cm is not None else None

    def pose2d(self, side: Handedness) -> Optional[Pose2D]:
        return Pose2D(self.rc, side) if self.rc is not None else None

    def canonical(self, side: Handedness) -> Optional[CanonicalPose]:
        return CanonicalPose(self.can, side) if self.can is not None else None

    def updated(self, **changes) -> "HandEntry":
        return replace(self, **changes)


ABSENT = HandEntry()


@dataclass(frozen=True, eq=False)
class FrameRecord:
    frame: int
    camera: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    left: HandEntry = ABSENT
    right: HandEntry = ABSENT
    seq: Optional[int] = None

    def hand(self, side: Handedness) -> HandEntry:
        return self.left if Handedness(side) is Handedness.LEFT else self.right

    def with_hand(self, side: Handedness, entry: HandEntry) -> "FrameRecord":
        key = "left" if Handedness(side) is Handedness.LEFT else "right"
        return replace(self, **{key: entry})

    @property
    def key(self) -> tuple[int, int]:
        return (-1 if self.seq is None else self.seq, self.frame)


def _real(x: float) -> float:
    return float(f"{float(x):.9g}")


def _rows(arr: np.ndarray) -> list[list[float]]:
    return [[_real(v) for v in row] for row in arr]


def _hand_to_dict(entry: HandEntry) -> dict:
    out: dict = {"present": entry.present}
    if entry.xyz_cm is not None:
        out["xyz_cm"] = _rows(entry.xyz_cm)
    if entry.rc is not None:
        out["rc"] = _rows(entry.rc)
    if entry.can is not None:
        out["can"] = _rows(entry.can)
    if entry.bbox is not None:
        out["bbox"] = entry.bbox.as_list()
    return out


def record_to_dict(record: FrameRecord) -> dict:
    cam = record.camera
    out: dict = {"frame": record.frame}
    if record.seq is not None:
        out["seq"] = record.seq
    out["camera"] = {"h": cam.height_px, "w": cam.width_px, "foc_cm": _real(cam.foc_cm), "pxcm": _real(cam.pxcm)}
    out["left"] = _hand_to_dict(record.left)
    out["right"] = _hand_to_dict(record.right)
    return out


def _hand_from_dict(obj) -> HandEntry:
    if obj is None:
        return ABSENT
    if not isinstance(obj, dict) or not isinstance(obj.get("present"), bool):
        raise SchemaError("hand entry needs a boolean 'present'")
    bbox = obj.get("bbox")
    if bbox is not None:
        if len(bbox) != 4:
            raise SchemaError("'bbox' must be [r0, r1, c0, c1]")
        bbox = BBox(*(int(v) for v in bbox))
    return HandEntry(obj["present"], obj.get("xyz_cm"), obj.get("rc"), obj.get("can"), bbox)


def record_from_dict(obj) -> FrameRecord:
    if not isinstance(obj, dict) or not isinstance(obj.get("frame"), int):
        raise SchemaError("record needs an integer 'frame'")
    cam = obj.get("camera") or {}
    try:
        camera = CameraIntrinsics(
            int(cam.get("h", 270)), int(cam.get("w", 480)), float(cam.get("foc_cm", 3.0)), float(cam.get("pxcm", 120.0))
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad camera: {exc}") from exc
    seq = obj.get("seq")
    if seq is not None and not isinstance(seq, int):
        raise SchemaError("'seq' must be an integer")
    return FrameRecord(obj["frame"], camera, _hand_from_dict(obj.get("left")), _hand_from_dict(obj.get("right")), seq)


def dumps_record(record: FrameRecord) -> str:
    return json.dumps(record_to_dict(record), separators=(",", ":"))


def write_dataset(records: Iterable[FrameRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(dumps_record(record))
            fh.write("\n")


def iter_dataset(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: {exc.msg}") from exc
            try:
                yield record_from_dict(obj)
            except (SchemaError, ValueError) as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from exc


def read_dataset(path) -> list[FrameRecord]:
    return list(iter_dataset(path))
