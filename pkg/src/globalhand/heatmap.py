"""Depth-weighted keypoint heatmaps and energy-map hand detection."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .core import NUM_JOINTS, Handedness, Pose2D
from .errors import NoContrastError, SchemaError

DEFAULT_RES = 32
DEFAULT_SIGMA = 1.5
DEFAULT_BETA = 0.25
DEFAULT_AMPLITUDE_RANGE = (0.5, 1.5)
OTSU_BINS = 256
DEFAULT_TAU_ABS = 0.1
DEFAULT_MARGIN = 0.15


@dataclass(frozen=True)
class BBox:
    """Inclusive pixel bounds."""

    row_min: int
    row_max: int
    col_min: int
    col_max: int

    def __post_init__(self):
        if self.row_min > self.row_max or self.col_min > self.col_max:
            raise ValueError(f"inverted bounding box {self}")

    @property
    def height(self) -> int:
        return self.row_max - self.row_min + 1

    @property
    def width(self) -> int:
        return self.col_max - self.col_min + 1

    @property
    def area(self) -> int:
        return self.height * self.width

    def as_list(self) -> list[int]:
        return [self.row_min, self.row_max, self.col_min, self.col_max]


class DetectionOutcome(NamedTuple):
    present: bool
    bbox: Optional[BBox]
    peak_energy: float


class DecodedHeatmaps(NamedTuple):
    pose: Pose2D
    amplitudes: np.ndarray
    missing: np.ndarray


def depth_to_amplitude(z_can, beta: float = DEFAULT_BETA, amplitude_range=DEFAULT_AMPLITUDE_RANGE):
    lo, hi = amplitude_range
    return np.clip(1.0 - beta * np.asarray(z_can, dtype=np.float64), lo, hi)


def amplitude_to_depth(amplitude, beta: float = DEFAULT_BETA):
    """Inverse of the amplitude law; only meaningful inside the unclamped range."""
    return (1.0 - np.asarray(amplitude, dtype=np.float64)) / beta


def encode_z_heatmaps(
    p: Pose2D,
    z_can,
    res: int = DEFAULT_RES,
    sigma: float = DEFAULT_SIGMA,
    beta: float = DEFAULT_BETA,
    amplitude_range=DEFAULT_AMPLITUDE_RANGE,
) -> np.ndarray:
    """One Gaussian map per joint, stronger for joints closer to the camera.

    Normalized coordinate ``rho`` maps to grid position ``rho * res``, so cell
    ``i`` is centered on ``i / res``.  Each map is scaled so its maximum cell
    equals the joint's amplitude exactly.  Returns shape ``(21, res, res)``.
    """
    if res < 8 or sigma <= 0:
        raise ValueError("need res >= 8 and sigma > 0")
    amplitudes = depth_to_amplitude(z_can, beta, amplitude_range)
    grid = np.arange(res, dtype=np.float64)
    maps = np.zeros((NUM_JOINTS, res, res))
    for j, (rho_r, rho_c) in enumerate(p.joints):
        if not (0.0 <= rho_r <= 1.0 and 0.0 <= rho_c <= 1.0):
            continue
        g_r = np.exp(-((grid - rho_r * res) ** 2) / (2 * sigma**2))
        g_c = np.exp(-((grid - rho_c * res) ** 2) / (2 * sigma**2))
        blob = np.outer(g_r, g_c)
        maps[j] = amplitudes[j] * blob / blob.max()
    return maps


def decode_heatmaps(maps, side: Handedness = Handedness.RIGHT) -> DecodedHeatmaps:
    """Argmax decoding; ties resolve to the smallest (row, col)."""
    maps = np.asarray(maps, dtype=np.float64)
    if maps.ndim != 3 or maps.shape[0] == 0:
        raise ValueError("expected a (joints, rows, cols) stack")
    n, rows, cols = maps.shape
    flat = maps.reshape(n, -1)
    idx = np.argmax(flat, axis=1)
    amplitudes = flat[np.arange(n), idx]
    missing = ~np.any(flat > 0, axis=1)
    coords = np.stack([idx // cols / rows, idx % cols / cols], axis=1)
    coords[missing] = np.nan
    amplitudes[missing] = 0.0
    return DecodedHeatmaps(Pose2D(coords, side), amplitudes, missing)


def otsu_bins(energy, bins: int = OTSU_BINS) -> np.ndarray:
    """Histogram bin index of every cell after min-max normalization."""
    energy = np.asarray(energy, dtype=np.float64)
    lo, hi = energy.min(), energy.max()
    if not hi > lo:
        raise NoContrastError("energy map has no contrast")
    normalized = (energy - lo) / (hi - lo)
    return np.minimum((normalized * bins).astype(np.int64), bins - 1)


def otsu_bin(energy, bins: int = OTSU_BINS) -> int:
    """Bin index ``k`` maximizing between-class variance of bins ``< k`` vs ``>= k``.

    Scores are compared exactly in rational arithmetic; ties keep the lowest ``k``.
    """
    cell_bins = otsu_bins(energy, bins)
    hist = np.bincount(cell_bins.ravel(), minlength=bins)
    weighted = hist * np.arange(bins)
    n_total = int(hist.sum())
    s_total = int(weighted.sum())
    n0 = np.cumsum(hist).tolist()
    s0 = np.cumsum(weighted).tolist()

    # score_k = num / den is proportional to w0 * w1 * (mu0 - mu1)^2;
    # compared by integer cross-multiplication so ties are exact
    best_k, best_num, best_den = 1, -1, 1
    for k in range(1, bins):
        n_lo, s_lo = n0[k - 1], s0[k - 1]
        n_hi, s_hi = n_total - n_lo, s_total - s_lo
        if n_lo == 0 or n_hi == 0:
            continue
        num = (s_lo * n_hi - s_hi * n_lo) ** 2
        den = n_lo * n_hi
        if num * best_den > best_num * den:
            best_k, best_num, best_den = k, num, den
    return best_k


def otsu_threshold(energy, bins: int = OTSU_BINS) -> float:
    """Otsu threshold in the energy map's own units."""
    energy = np.asarray(energy, dtype=np.float64)
    k = otsu_bin(energy, bins)
    lo, hi = energy.min(), energy.max()
    return float(lo + (hi - lo) * k / bins)


def _cells_to_pixels(first: int, last: int, cells: int, pixels: int, margin: float) -> tuple[int, int]:
    scale = pixels / cells
    lo = first * scale
    hi = (last + 1) * scale
    pad = margin * (hi - lo)
    return max(0, math.floor(lo - pad)), min(pixels - 1, math.ceil(hi + pad) - 1)


def energy_bbox(
    energy,
    img_h: int,
    img_w: int,
    tau_abs: float = DEFAULT_TAU_ABS,
    margin: float = DEFAULT_MARGIN,
) -> DetectionOutcome:
    """Detect a hand from its energy map.

    Low peak energy means the hand is absent.  Otherwise the Otsu-selected
    region's tight box is scaled to image pixels and padded by ``margin`` of
    its size on each side.
    """
    energy = np.asarray(energy, dtype=np.float64)
    peak = float(energy.max())
    if peak < tau_abs:
        return DetectionOutcome(False, None, peak)
    if energy.min() == peak:
        mask = np.ones(energy.shape, dtype=bool)
    else:
        mask = otsu_bins(energy) >= otsu_bin(energy)
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    r0, r1 = _cells_to_pixels(rows[0], rows[-1], energy.shape[0], img_h, margin)
    c0, c1 = _cells_to_pixels(cols[0], cols[-1], energy.shape[1], img_w, margin)
    return DetectionOutcome(True, BBox(r0, r1, c0, c1), peak)


def crop_to_image(p_crop, bbox: BBox, img_h: int, img_w: int) -> np.ndarray:
    """Map normalized crop coordinates to normalized full-image coordinates."""
    p_crop = np.asarray(p_crop, dtype=np.float64)
    row = (bbox.row_min + p_crop[..., 0] * bbox.height) / img_h
    col = (bbox.col_min + p_crop[..., 1] * bbox.width) / img_w
    return np.stack([row, col], axis=-1)


def image_to_crop(p_img, bbox: BBox, img_h: int, img_w: int) -> np.ndarray:
    p_img = np.asarray(p_img, dtype=np.float64)
    row = (p_img[..., 0] * img_h - bbox.row_min) / bbox.height
    col = (p_img[..., 1] * img_w - bbox.col_min) / bbox.width
    return np.stack([row, col], axis=-1)


# -- serialization ---------------------------------------------------------

_HEADER = struct.Struct("<II")


def heatmap_to_bytes(heatmap) -> bytes:
    heatmap = np.asarray(heatmap)
    if heatmap.ndim != 2:
        raise ValueError("heatmap must be 2D")
    rows, cols = heatmap.shape
    return _HEADER.pack(rows, cols) + heatmap.astype("<f4").tobytes()


def heatmaps_from_bytes(blob: bytes) -> list[np.ndarray]:
    """Parse one or more concatenated ``header + float32 payload`` blocks."""
    out, offset = [], 0
    while offset < len(blob):
        if len(blob) - offset < _HEADER.size:
            raise SchemaError("truncated heatmap header")
        rows, cols = _HEADER.unpack_from(blob, offset)
        offset += _HEADER.size
        size = rows * cols * 4
        if rows == 0 or cols == 0 or len(blob) - offset < size:
            raise SchemaError("truncated or empty heatmap payload")
        data = np.frombuffer(blob, dtype="<f4", count=rows * cols, offset=offset)
        out.append(data.reshape(rows, cols).astype(np.float64))
        offset += size
    return out


def write_heatmaps(path, maps) -> None:
    Path(path).write_bytes(b"".join(heatmap_to_bytes(m) for m in maps))


def read_heatmaps(path) -> list[np.ndarray]:
    return heatmaps_from_bytes(Path(path).read_bytes())


def write_pgm(path, energy, binary: bool = True, maxval: int = 255) -> None:
    """Write an energy map as PGM, scaling ``[0, max]`` to ``[0, maxval]``."""
    energy = np.asarray(energy, dtype=np.float64)
    peak = energy.max()
    scaled = np.zeros(energy.shape, dtype=np.int64) if peak <= 0 else np.rint(energy / peak * maxval).astype(np.int64)
    rows, cols = energy.shape
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        header = f"P5\n{cols} {rows}\n{maxval}\n".encode("ascii")
        Path(path).write_bytes(header + scaled.astype(dtype).tobytes())
    else:
        lines = ["P2", f"{cols} {rows}", str(maxval)]
        lines += [" ".join(str(v) for v in row) for row in scaled]
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_pgm(path) -> np.ndarray:
    """Read a P2 or P5 PGM as floats in ``[0, 1]`` (value / maxval)."""
    blob = Path(path).read_bytes()
    magic = blob[:2]
    if magic not in (b"P2", b"P5"):
        raise SchemaError(f"{path}: not a PGM file")
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            pos = blob.index(b"\n", pos)
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        tokens.append(blob[start:pos])
    cols, rows, maxval = (int(t) for t in tokens)
    if magic == b"P5":
        pos += 1
        dtype = ">u2" if maxval > 255 else "u1"
        data = np.frombuffer(blob, dtype=dtype, count=rows * cols, offset=pos)
    else:
        data = np.array(blob[pos:].split(), dtype=np.int64)[: rows * cols]
    if data.size != rows * cols:
        raise SchemaError(f"{path}: truncated PGM payload")
    return data.reshape(rows, cols).astype(np.float64) / maxval
