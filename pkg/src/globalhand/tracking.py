"""Temporal smoothing of the root radius with a sliding polynomial fit."""
from __future__ import annotations

from collections import deque
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .core import Handedness
from .errors import FitError, OrderingError

DEFAULT_WINDOW = 5
DEFAULT_DEGREE = 2


def polyfit(ts: Sequence[float], ys: Sequence[float], degree: int) -> np.ndarray:
    """Least-squares polynomial coefficients, lowest order first."""
    ts = np.asarray(ts, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if degree < 0:
        raise FitError("degree must be non-negative")
    if ts.shape != ys.shape or ts.ndim != 1:
        raise FitError("ts and ys must be equal-length 1D sequences")
    if ts.size < degree + 1:
        raise FitError(f"{ts.size} points cannot determine a degree-{degree} polynomial")
    if np.unique(ts).size != ts.size:
        raise FitError("sample times must be distinct")
    return P.polyfit(ts, ys, degree)


class TrackState:
    """Bounded history of ``(frame, r)`` samples for one hand.

    By default the newest raw sample is part of the fit; with
    ``extrapolate=True`` the fit uses only earlier samples and is evaluated
    forward at the new frame.
    """

    def __init__(
        self,
        side: Handedness = Handedness.RIGHT,
        capacity: int = DEFAULT_WINDOW,
        degree: int = DEFAULT_DEGREE,
        extrapolate: bool = False,
    ):
        if not 0 <= degree < capacity:
            raise ValueError("need 0 <= degree < capacity")
        self.side = Handedness(side)
        self.capacity = capacity
        self.degree = degree
        self.extrapolate = extrapolate
        self.history: deque[tuple[int, float]] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.history)

    def reset(self) -> None:
        self.history.clear()

    def push(self, frame: int, r_raw: float) -> float:
        if self.history and frame <= self.history[-1][0]:
            raise OrderingError(f"frame {frame} does not follow frame {self.history[-1][0]}")
        self.history.append((frame, float(r_raw)))
        if len(self.history) <= self.degree + 1:
            return float(r_raw)
        samples = list(self.history)
        if self.extrapolate:
            samples = samples[:-1]
        ts = np.array([s[0] for s in samples], dtype=np.float64)
        ys = np.array([s[1] for s in samples])
        center = ts.mean()
        coef = polyfit(ts - center, ys, self.degree)
        return float(P.polyval(frame - center, coef))


def push_and_estimate(state: TrackState, frame: int, r_raw: float) -> float:
    return state.push(frame, r_raw)
